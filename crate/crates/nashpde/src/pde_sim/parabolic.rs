use super::Tridiagonal;
use crate::error::{config, Result};

/// `a_t = eps a_xx + b a_x + lambda a` on `[0, L]`, `a_x(0) = 0`,
/// `a(L) = g(t)`. Crank-Nicolson with a ghost node at 0.
#[derive(Debug, Clone)]
pub struct Parabolic {
    length: f64,
    dt: f64,
    v: Vec<f64>,
    // Spatial operator on the M unknowns (nodes 0..M-1).
    a_lo: Vec<f64>,
    a_di: Vec<f64>,
    a_up: Vec<f64>,
    // Coupling of node M-1 to the boundary value.
    coupling: f64,
    // Left-hand side I - dt/2 A.
    lhs: Tridiagonal,
    rhs: Vec<f64>,
}

impl Parabolic {
    pub fn new(length: f64, eps: f64, b: f64, lambda: f64, cells: usize, dt: f64, value: f64) -> Result<Self> {
        if cells < 2 {
            return Err(config("parabolic channel needs at least 2 cells"));
        }
        let m = cells;
        let dx = length / m as f64;
        let d2 = eps / (dx * dx);
        let d1 = b / (2.0 * dx);
        let mut a_lo = vec![d2 - d1; m];
        let a_di = vec![-2.0 * d2 + lambda; m];
        let mut a_up = vec![d2 + d1; m];
        // Ghost node a_{-1} = a_1 folds the left neighbour into the right one.
        a_up[0] = 2.0 * d2;
        a_lo[0] = 0.0;
        let coupling = a_up[m - 1];
        a_up[m - 1] = 0.0;
        let h = 0.5 * dt;
        let l_lo: Vec<f64> = a_lo.iter().map(|x| -h * x).collect();
        let l_di: Vec<f64> = a_di.iter().map(|x| 1.0 - h * x).collect();
        let l_up: Vec<f64> = a_up.iter().map(|x| -h * x).collect();
        Ok(Self {
            length,
            dt,
            v: vec![value; m + 1],
            a_lo,
            a_di,
            a_up,
            coupling,
            lhs: Tridiagonal::new(&l_lo, &l_di, &l_up),
            rhs: vec![0.0; m],
        })
    }

    pub fn cells(&self) -> usize {
        self.v.len() - 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.cells()).map(|j| j as f64 * dx).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn set_profile(&mut self, f: impl Fn(f64) -> f64) {
        let dx = self.dx();
        for (j, v) in self.v.iter_mut().enumerate() {
            *v = f(j as f64 * dx);
        }
    }

    pub fn advance(&mut self, g_next: f64) {
        let m = self.cells();
        let h = 0.5 * self.dt;
        let v = &self.v;
        for j in 0..m {
            let mut av = self.a_di[j] * v[j];
            if j > 0 {
                av += self.a_lo[j] * v[j - 1];
            }
            if j + 1 < m {
                av += self.a_up[j] * v[j + 1];
            }
            self.rhs[j] = v[j] + h * av;
        }
        self.rhs[m - 1] += h * self.coupling * (v[m] + g_next);
        self.lhs.solve(&mut self.rhs);
        self.v[..m].copy_from_slice(&self.rhs);
        self.v[m] = g_next;
    }
}
