//! Quadratic N-player games: payoffs, the game Hessian and the Nash point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Payoff of one player,
/// `J_i = 1/2 sum_jk eps_jk H_jk T_j T_k + sum_j h_j T_j + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPayoff {
    pub owner: usize,
    /// Curvature block `H^i_jk`, row-major, symmetric.
    pub h_quad: Vec<Vec<f64>>,
    pub h_lin: Vec<f64>,
    pub c: f64,
}

impl QuadraticPayoff {
    pub fn dim(&self) -> usize {
        self.h_lin.len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.h_lin.len() != n || self.h_quad.len() != n {
            return Err(input(format!("payoff {} must have dimension {n}", self.owner)));
        }
        for (j, row) in self.h_quad.iter().enumerate() {
            if row.len() != n {
                return Err(input(format!("payoff {} row {j} has length {}", self.owner, row.len())));
            }
            for k in 0..n {
                if (row[k] - self.h_quad[k][j]).abs() > 1e-12 * (1.0 + row[k].abs()) {
                    return Err(input(format!("payoff {} curvature is not symmetric at ({j},{k})", self.owner)));
                }
            }
        }
        let hii = self.h_quad[self.owner][self.owner];
        if !(hii < 0.0) {
            return Err(input(format!("payoff {} is not strictly concave in its own action (H_ii = {hii})", self.owner)));
        }
        Ok(())
    }
}

/// Coupling weight: 1 on the diagonal, `eps` elsewhere.
#[inline]
pub fn coupling(eps: f64, j: usize, k: usize) -> f64 {
    if j == k {
        1.0
    } else {
        eps
    }
}

/// Evaluate one payoff at the action profile `theta`.
pub fn evaluate_payoff(payoff: &QuadraticPayoff, epsilon: f64, theta: &[f64]) -> Result<f64> {
    let n = payoff.dim();
    if theta.len() != n {
        return Err(input(format!("action vector has length {}, payoff expects {n}", theta.len())));
    }
    Ok(eval_unchecked(payoff, epsilon, theta))
}

#[inline]
pub(crate) fn eval_unchecked(payoff: &QuadraticPayoff, epsilon: f64, theta: &[f64]) -> f64 {
    let n = theta.len();
    let mut quad = 0.0;
    for j in 0..n {
        let row = &payoff.h_quad[j];
        for k in 0..n {
            quad += coupling(epsilon, j, k) * row[k] * theta[j] * theta[k];
        }
    }
    let lin: f64 = payoff.h_lin.iter().zip(theta).map(|(h, t)| h * t).sum();
    0.5 * quad + lin + payoff.c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticGame {
    pub payoffs: Vec<QuadraticPayoff>,
    pub epsilon: f64,
}

/// Row `i` holds `eps_ij H^i_ij` taken from player `i`'s payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct GameHessian {
    pub matrix: DMatrix<f64>,
}

impl QuadraticGame {
    pub fn new(mut payoffs: Vec<QuadraticPayoff>, epsilon: f64) -> Result<Self> {
        let n = payoffs.len();
        if n == 0 {
            return Err(input("game needs at least one player"));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(input(format!("coupling epsilon must lie in (0, 1], got {epsilon}")));
        }
        payoffs.sort_by_key(|p| p.owner);
        for (i, p) in payoffs.iter().enumerate() {
            if p.owner != i {
                return Err(input(format!("payoff owners must be exactly 0..{n}, found {}", p.owner)));
            }
            p.validate(n)?;
        }
        Ok(Self { payoffs, epsilon })
    }

    pub fn players(&self) -> usize {
        self.payoffs.len()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.payoffs.clone(), epsilon)
    }

    /// All payoffs at `theta`.
    pub fn payoffs_at(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.payoffs.iter().map(|p| evaluate_payoff(p, self.epsilon, theta)).collect()
    }

    pub fn hessian(&self) -> GameHessian {
        let n = self.players();
        let matrix = DMatrix::from_fn(n, n, |i, j| coupling(self.epsilon, i, j) * self.payoffs[i].h_quad[i][j]);
        GameHessian { matrix }
    }

    /// `h_i = h^i_i`.
    pub fn own_linear(&self) -> DVector<f64> {
        DVector::from_iterator(self.players(), self.payoffs.iter().enumerate().map(|(i, p)| p.h_lin[i]))
    }

    /// Unique Nash point `theta* = -H^{-1} h`.
    pub fn nash_equilibrium(&self) -> Result<Vec<f64>> {
        let h = self.hessian().matrix;
        let rhs = -self.own_linear();
        let scale = h.amax().max(f64::MIN_POSITIVE);
        let lu = h.clone().lu();
        // Partial-pivot LU; reject pivots that vanish relative to the matrix scale.
        let u = lu.u();
        if (0..u.nrows()).any(|k| u[(k, k)].abs() <= 1e-13 * scale) {
            return Err(Error::Singular("game Hessian is singular".into()));
        }
        let x = lu.solve(&rhs).ok_or_else(|| Error::Singular("game Hessian is singular".into()))?;
        Ok(x.iter().copied().collect())
    }

    /// Gradient of player `i`'s payoff with respect to its own action.
    pub fn own_gradient(&self, i: usize, theta: &[f64]) -> f64 {
        let p = &self.payoffs[i];
        let mut g = p.h_lin[i];
        for k in 0..theta.len() {
            g += coupling(self.epsilon, i, k) * p.h_quad[i][k] * theta[k];
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dominance {
    pub pass: bool,
    pub margins: Vec<f64>,
}

/// Strict row diagonal dominance, margin `|H_ii| - sum_{j != i} |H_ij|`.
pub fn check_diagonal_dominance(h: &GameHessian) -> Dominance {
    let m = &h.matrix;
    let margins: Vec<f64> = (0..m.nrows())
        .map(|i| {
            let off: f64 = (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            m[(i, i)].abs() - off
        })
        .collect();
    Dominance { pass: margins.iter().all(|&x| x > 0.0), margins }
}

/// The heterogeneous duopoly used throughout the examples:
/// `J1 = -5 T1^2 + 5 eps T1 T2 + 250 T1 - 150 T2 - 3000`,
/// `J2 = -5 T2^2 + 5 eps T1 T2 - 150 T1 + 150 T2 + 2500`.
pub fn duopoly(epsilon: f64) -> Result<QuadraticGame> {
    let p1 = QuadraticPayoff {
        owner: 0,
        h_quad: vec![vec![-10.0, 5.0], vec![5.0, 0.0]],
        h_lin: vec![250.0, -150.0],
        c: -3000.0,
    };
    let p2 = QuadraticPayoff {
        owner: 1,
        h_quad: vec![vec![0.0, 5.0], vec![5.0, -10.0]],
        h_lin: vec![-150.0, 150.0],
        c: 2500.0,
    };
    QuadraticGame::new(vec![p1, p2], epsilon)
}

/// Price competition between two firms with sales `s2 = (u1 - u2)/p`,
/// `s1 = Sd - s2` and profits `J_i = s_i (u_i - m_i)`.
pub fn market_duopoly(m1: f64, m2: f64, sd: f64, p: f64) -> Result<QuadraticGame> {
    if !(p > 0.0) {
        return Err(input("consumer preference p must be positive"));
    }
    let p1 = QuadraticPayoff {
        owner: 0,
        h_quad: vec![vec![-2.0 / p, 1.0 / p], vec![1.0 / p, 0.0]],
        h_lin: vec![(m1 + sd * p) / p, -m1 / p],
        c: -sd * m1,
    };
    let p2 = QuadraticPayoff {
        owner: 1,
        h_quad: vec![vec![0.0, 1.0 / p], vec![1.0 / p, -2.0 / p]],
        h_lin: vec![-m2 / p, m2 / p],
        c: 0.0,
    };
    QuadraticGame::new(vec![p1, p2], 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn duopoly_hessian_and_nash() {
        let g = duopoly(1.0).unwrap();
        let h = g.hessian().matrix;
        assert_eq!(h[(0, 0)], -10.0);
        assert_eq!(h[(0, 1)], 5.0);
        assert_eq!(h[(1, 0)], 5.0);
        let th = g.nash_equilibrium().unwrap();
        assert_abs_diff_eq!(th[0], 130.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(th[1], 110.0 / 3.0, epsilon = 1e-10);
        let h_half = duopoly(0.5).unwrap().hessian().matrix;
        assert_eq!(h_half[(0, 1)], 2.5);
    }

    #[test]
    fn payoff_at_zero_is_offset() {
        let g = duopoly(0.7).unwrap();
        assert_eq!(evaluate_payoff(&g.payoffs[0], 0.7, &[0.0, 0.0]).unwrap(), -3000.0);
        assert!(evaluate_payoff(&g.payoffs[0], 0.7, &[0.0]).is_err());
    }

    #[test]
    fn dominance_examples() {
        let d = check_diagonal_dominance(&duopoly(1.0).unwrap().hessian());
        assert!(d.pass);
        assert_eq!(d.margins, vec![5.0, 5.0]);
        let bad = GameHessian { matrix: DMatrix::from_row_slice(2, 2, &[-10.0, 11.0, 5.0, -10.0]) };
        let d = check_diagonal_dominance(&bad);
        assert!(!d.pass);
        assert!(d.margins[0] < 0.0 && d.margins[1] > 0.0);
    }

    #[test]
    fn market_nash_matches_closed_form() {
        let (m1, m2, sd, p) = (1.5, 1.0, 10.0, 0.5);
        let th = market_duopoly(m1, m2, sd, p).unwrap().nash_equilibrium().unwrap();
        assert_abs_diff_eq!(th[0], (2.0 * m1 + m2 + 2.0 * sd * p) / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(th[1], (m1 + 2.0 * m2 + sd * p) / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_convex_own_action() {
        let p = QuadraticPayoff { owner: 0, h_quad: vec![vec![1.0]], h_lin: vec![0.0], c: 0.0 };
        assert!(QuadraticGame::new(vec![p], 1.0).is_err());
    }

    #[test]
    fn singular_hessian_is_reported() {
        let p1 = QuadraticPayoff { owner: 0, h_quad: vec![vec![-1.0, 1.0], vec![1.0, 0.0]], h_lin: vec![1.0, 1.0], c: 0.0 };
        let p2 = QuadraticPayoff { owner: 1, h_quad: vec![vec![0.0, 1.0], vec![1.0, -1.0]], h_lin: vec![1.0, 1.0], c: 0.0 };
        let g = QuadraticGame::new(vec![p1, p2], 1.0).unwrap();
        assert!(matches!(g.nash_equilibrium(), Err(Error::Singular(_))));
    }
}
