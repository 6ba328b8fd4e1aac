use super::Tridiagonal;
use crate::error::{config, Result};

/// `a_tt = a_xx + d a_xxt` on `[0, L]`, `a_x(0) = 0`, `a(L) = theta(t)`.
///
/// Two-field form in `(a, v = a_t)`, trapezoidal in time. Eliminating
/// `a^{n+1}` leaves one tridiagonal solve for `v^{n+1}` per step:
/// `(I - q L) v' = v + dt L a + q L v` with `q = dt^2/4 + d dt/2`.
#[derive(Debug, Clone)]
pub struct Wave {
    length: f64,
    dt: f64,
    a: Vec<f64>,
    v: Vec<f64>,
    q: f64,
    lhs: Tridiagonal,
    rhs: Vec<f64>,
}

impl Wave {
    pub fn new(length: f64, damping: f64, cells: usize, dt: f64, value: f64) -> Result<Self> {
        if cells < 2 {
            return Err(config("wave channel needs at least 2 cells"));
        }
        if damping < 0.0 {
            return Err(config("damping must be nonnegative"));
        }
        let m = cells;
        let dx = length / m as f64;
        let r = 1.0 / (dx * dx);
        let q = 0.25 * dt * dt + 0.5 * damping * dt;
        let mut l_lo = vec![-q * r; m];
        let l_di = vec![1.0 + 2.0 * q * r; m];
        let mut l_up = vec![-q * r; m];
        l_lo[0] = 0.0;
        l_up[0] = -2.0 * q * r;
        l_up[m - 1] = 0.0;
        Ok(Self {
            length,
            dt,
            a: vec![value; m + 1],
            v: vec![0.0; m + 1],
            q,
            lhs: Tridiagonal::new(&l_lo, &l_di, &l_up),
            rhs: vec![0.0; m],
        })
    }

    pub fn cells(&self) -> usize {
        self.a.len() - 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.cells()).map(|j| j as f64 * dx).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn velocities(&self) -> &[f64] {
        &self.v
    }

    pub fn set_profile(&mut self, f: impl Fn(f64) -> (f64, f64)) {
        let dx = self.dx();
        for j in 0..=self.cells() {
            let (a, v) = f(j as f64 * dx);
            self.a[j] = a;
            self.v[j] = v;
        }
    }

    /// Discrete `(L z)_j` with the Neumann ghost at 0; needs `z[j+1]`.
    #[inline]
    fn lap(z: &[f64], j: usize, r: f64) -> f64 {
        if j == 0 {
            2.0 * r * (z[1] - z[0])
        } else {
            r * (z[j + 1] - 2.0 * z[j] + z[j - 1])
        }
    }

    pub fn advance(&mut self, theta_next: f64) {
        let m = self.cells();
        let dx = self.dx();
        let r = 1.0 / (dx * dx);
        let v_bnd = (theta_next - self.a[m]) / self.dt;
        for j in 0..m {
            self.rhs[j] = self.v[j] + self.dt * Self::lap(&self.a, j, r) + self.q * Self::lap(&self.v, j, r);
        }
        self.rhs[m - 1] += self.q * r * v_bnd;
        self.lhs.solve(&mut self.rhs);
        let h = 0.5 * self.dt;
        for j in 0..m {
            self.a[j] += h * (self.v[j] + self.rhs[j]);
            self.v[j] = self.rhs[j];
        }
        self.a[m] = theta_next;
        self.v[m] = v_bnd;
    }
}
