//! Trigonometric interpolation on a uniform periodic grid.
//!
//! Closed curves, frame fields, sections and circle maps are all sampled on
//! the uniform grid `theta_j = 2*pi*j/m`. This module turns those samples
//! into a smooth periodic function that is exact at the nodes and can be
//! evaluated (with derivatives) anywhere, which is what the nearest-point
//! and transition solvers differentiate against.

/// Trigonometric interpolant of real samples on the uniform circle grid.
///
/// For even `m` the Nyquist mode is kept as a pure cosine, the symmetric
/// choice whose derivative vanishes at the nodes.
#[derive(Debug, Clone)]
pub struct PeriodicInterp {
    mean: f64,
    cos_coeff: Vec<f64>,
    sin_coeff: Vec<f64>,
    nyquist: Option<f64>,
    m: usize,
}

impl PeriodicInterp {
    pub fn new(samples: &[f64]) -> Self {
        let m = samples.len();
        assert!(m >= 2, "need at least two samples");
        let half = (m - 1) / 2;
        // cos/sin lookup at grid multiples; index (j*k) % m
        let mut cos_tab = Vec::with_capacity(m);
        let mut sin_tab = Vec::with_capacity(m);
        for l in 0..m {
            let ang = std::f64::consts::TAU * l as f64 / m as f64;
            cos_tab.push(ang.cos());
            sin_tab.push(ang.sin());
        }
        let mean = samples.iter().sum::<f64>() / m as f64;
        let mut cos_coeff = Vec::with_capacity(half);
        let mut sin_coeff = Vec::with_capacity(half);
        for k in 1..=half {
            let mut ca = 0.0;
            let mut sa = 0.0;
            for (j, &f) in samples.iter().enumerate() {
                let idx = (j * k) % m;
                ca += f * cos_tab[idx];
                sa += f * sin_tab[idx];
            }
            cos_coeff.push(2.0 * ca / m as f64);
            sin_coeff.push(2.0 * sa / m as f64);
        }
        let nyquist = if m % 2 == 0 {
            let mut acc = 0.0;
            for (j, &f) in samples.iter().enumerate() {
                acc += if j % 2 == 0 { f } else { -f };
            }
            Some(acc / m as f64)
        } else {
            None
        };
        PeriodicInterp {
            mean,
            cos_coeff,
            sin_coeff,
            nyquist,
            m,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// Value, first and second derivative at `theta`, sharing one recurrence.
    pub fn eval_derivs(&self, theta: f64) -> (f64, f64, f64) {
        let (c1, s1) = (theta.cos(), theta.sin());
        let mut ck = 1.0;
        let mut sk = 0.0;
        let mut v = self.mean;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (i, (&a, &b)) in self.cos_coeff.iter().zip(&self.sin_coeff).enumerate() {
            let k = (i + 1) as f64;
            let cn = ck * c1 - sk * s1;
            let sn = sk * c1 + ck * s1;
            ck = cn;
            sk = sn;
            v += a * ck + b * sk;
            d1 += k * (b * ck - a * sk);
            d2 -= k * k * (a * ck + b * sk);
        }
        if let Some(ny) = self.nyquist {
            let k = self.m as f64 / 2.0;
            let (ckn, skn) = ((k * theta).cos(), (k * theta).sin());
            v += ny * ckn;
            d1 -= ny * k * skn;
            d2 -= ny * k * k * ckn;
        }
        (v, d1, d2)
    }

    /// Value and first derivative.
    pub fn eval_d1(&self, theta: f64) -> (f64, f64) {
        let (c1, s1) = (theta.cos(), theta.sin());
        let mut ck = 1.0;
        let mut sk = 0.0;
        let mut v = self.mean;
        let mut d1 = 0.0;
        for (i, (&a, &b)) in self.cos_coeff.iter().zip(&self.sin_coeff).enumerate() {
            let k = (i + 1) as f64;
            let cn = ck * c1 - sk * s1;
            let sn = sk * c1 + ck * s1;
            ck = cn;
            sk = sn;
            v += a * ck + b * sk;
            d1 += k * (b * ck - a * sk);
        }
        if let Some(ny) = self.nyquist {
            let k = self.m as f64 / 2.0;
            let (ckn, skn) = ((k * theta).cos(), (k * theta).sin());
            v += ny * ckn;
            d1 -= ny * k * skn;
        }
        (v, d1)
    }

    /// Value only; skips the derivative accumulators.
    pub fn eval(&self, theta: f64) -> f64 {
        let (c1, s1) = (theta.cos(), theta.sin());
        let mut ck = 1.0;
        let mut sk = 0.0;
        let mut v = self.mean;
        for (&a, &b) in self.cos_coeff.iter().zip(&self.sin_coeff) {
            let cn = ck * c1 - sk * s1;
            let sn = sk * c1 + ck * s1;
            ck = cn;
            sk = sn;
            v += a * ck + b * sk;
        }
        if let Some(ny) = self.nyquist {
            let k = self.m as f64 / 2.0;
            v += ny * (k * theta).cos();
        }
        v
    }

    pub fn deriv(&self, theta: f64) -> f64 {
        self.eval_derivs(theta).1
    }
}

/// Componentwise interpolant of vector samples (points, frames, sections).
#[derive(Debug, Clone)]
pub struct VectorInterp {
    components: Vec<PeriodicInterp>,
}

impl VectorInterp {
    pub fn new(samples: &[nalgebra::DVector<f64>]) -> Self {
        assert!(!samples.is_empty());
        let dim = samples[0].len();
        let components = (0..dim)
            .map(|c| {
                let col: Vec<f64> = samples.iter().map(|p| p[c]).collect();
                PeriodicInterp::new(&col)
            })
            .collect();
        VectorInterp { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, theta: f64) -> nalgebra::DVector<f64> {
        nalgebra::DVector::from_iterator(
            self.dim(),
            self.components.iter().map(|c| c.eval(theta)),
        )
    }

    /// Value with first and second derivative, one pass per component.
    pub fn eval_derivs(
        &self,
        theta: f64,
    ) -> (
        nalgebra::DVector<f64>,
        nalgebra::DVector<f64>,
        nalgebra::DVector<f64>,
    ) {
        let dim = self.dim();
        let mut v = nalgebra::DVector::zeros(dim);
        let mut d1 = nalgebra::DVector::zeros(dim);
        let mut d2 = nalgebra::DVector::zeros(dim);
        for (c, comp) in self.components.iter().enumerate() {
            let (a, b, g) = comp.eval_derivs(theta);
            v[c] = a;
            d1[c] = b;
            d2[c] = g;
        }
        (v, d1, d2)
    }

    pub fn deriv(&self, theta: f64) -> nalgebra::DVector<f64> {
        self.eval_derivs(theta).1
    }

    /// Value and first derivative written into caller buffers (hot paths).
    pub fn eval_deriv_into(&self, theta: f64, v: &mut [f64], d1: &mut [f64]) {
        for (c, comp) in self.components.iter().enumerate() {
            let (a, b) = comp.eval_d1(theta);
            v[c] = a;
            d1[c] = b;
        }
    }
}
