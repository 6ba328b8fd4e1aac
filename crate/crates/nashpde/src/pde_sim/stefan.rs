use super::solve_tridiagonal;
use crate::error::{config, Error, Result};

/// One-phase Stefan problem in front-fixing coordinates `xi = x / s(t)`:
/// `a_t = a_xx` on `(0, s)`, `-a_x(0) = q(t)`, `a(s) = 0`, `s' = -a_x(s)`.
#[derive(Debug, Clone)]
pub struct Stefan {
    dt: f64,
    cap: f64,
    s: f64,
    a: Vec<f64>,
    q_prev: f64,
    t: f64,
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stefan {
    pub fn new(s0: f64, cap: f64, cells: usize, dt: f64) -> Result<Self> {
        if cells < 3 {
            return Err(config("Stefan channel needs at least 3 cells"));
        }
        let n = cells;
        Ok(Self {
            dt,
            cap,
            s: s0,
            a: vec![0.0; n + 1],
            q_prev: 0.0,
            t: 0.0,
            lo: vec![0.0; n],
            di: vec![0.0; n],
            up: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        })
    }

    pub fn cells(&self) -> usize {
        self.a.len() - 1
    }

    pub fn interface(&self) -> f64 {
        self.s
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.cells() as f64;
        (0..=self.cells()).map(|j| self.s * j as f64 / n).collect()
    }

    /// Temperature above melting on the physical grid.
    pub fn values(&self) -> &[f64] {
        &self.a
    }

    /// Initial temperature profile on `[0, s]` and the flux applied at `t = 0`.
    pub fn set_state(&mut self, f: impl Fn(f64) -> f64, q0: f64) {
        let n = self.cells();
        for j in 0..n {
            self.a[j] = f(self.s * j as f64 / n as f64);
        }
        self.a[n] = 0.0;
        self.q_prev = q0;
    }

    /// Interface speed `-a_x(s)` from a second-order one-sided difference.
    pub fn interface_speed(&self, a: &[f64], s: f64) -> f64 {
        let n = self.cells();
        let dxi = 1.0 / n as f64;
        let ax = (3.0 * a[n] - 4.0 * a[n - 1] + a[n - 2]) / (2.0 * dxi);
        -ax / s
    }

    pub fn advance(&mut self, q_next: f64) -> Result<()> {
        let n = self.cells();
        let dxi = 1.0 / n as f64;
        let sdot = self.interface_speed(&self.a, self.s);
        let s_pred = self.s + self.dt * sdot;
        let sm = 0.5 * (self.s + s_pred);
        if !(sm > 0.0) {
            return Err(Error::Simulation { t: self.t, msg: format!("interface collapsed (s = {s_pred})") });
        }
        let d2 = 1.0 / (sm * sm * dxi * dxi);
        let h = 0.5 * self.dt;
        let q_mid = 0.5 * (self.q_prev + q_next);
        for j in 0..n {
            let xi = j as f64 * dxi;
            let d1 = xi * sdot / (2.0 * sm * dxi);
            let (al, ad, au) = if j == 0 { (0.0, -2.0 * d2, 2.0 * d2) } else { (d2 - d1, -2.0 * d2, d2 + d1) };
            let mut av = ad * self.a[j] + au * self.a[j + 1];
            if j > 0 {
                av += al * self.a[j - 1];
            }
            self.rhs[j] = self.a[j] + h * av;
            self.lo[j] = -h * al;
            self.di[j] = 1.0 - h * ad;
            self.up[j] = if j + 1 < n { -h * au } else { 0.0 };
        }
        // Ghost-node flux source at the actuated end.
        self.rhs[0] += self.dt * 2.0 * q_mid / (sm * dxi);
        solve_tridiagonal(&self.lo, &self.di, &self.up, &mut self.rhs, &mut self.scratch);
        self.a[..n].copy_from_slice(&self.rhs);
        self.a[n] = 0.0;
        let sdot_new = self.interface_speed(&self.a, s_pred);
        self.s += h * (sdot + sdot_new);
        self.q_prev = q_next;
        self.t += self.dt;
        if !(self.s > 0.0) {
            return Err(Error::Simulation { t: self.t, msg: format!("interface collapsed (s = {})", self.s) });
        }
        if self.s >= self.cap {
            return Err(Error::Simulation { t: self.t, msg: format!("interface reached the wall at {}", self.cap) });
        }
        Ok(())
    }
}
