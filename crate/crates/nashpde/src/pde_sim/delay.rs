use super::{DelayProfile, LagCdf};

/// Exact delay line holding `n + 1` samples `x(t - n dt), ..., x(t)`.
#[derive(Debug, Clone)]
pub struct DelayLine {
    buf: Vec<f64>,
    head: usize,
    sum: f64,
    pushes: usize,
}

impl DelayLine {
    pub fn new(n: usize, value: f64) -> Self {
        let len = n + 1;
        Self { buf: vec![value; len], head: 0, sum: value * len as f64, pushes: 0 }
    }

    /// Delay in steps.
    pub fn steps(&self) -> usize {
        self.buf.len() - 1
    }

    /// Refill from a history function of the lag `k` steps back (k = n..0).
    pub fn fill_with(&mut self, f: impl Fn(usize) -> f64) {
        let n = self.steps();
        for (i, slot) in self.buf.iter_mut().enumerate() {
            *slot = f(n - i);
        }
        self.head = 0;
        self.resum();
    }

    fn resum(&mut self) {
        self.sum = self.buf.iter().sum();
    }

    pub fn oldest(&self) -> f64 {
        self.buf[self.head]
    }

    pub fn newest(&self) -> f64 {
        let len = self.buf.len();
        self.buf[(self.head + len - 1) % len]
    }

    pub fn push(&mut self, v: f64) {
        self.sum += v - self.buf[self.head];
        self.buf[self.head] = v;
        self.head = (self.head + 1) % self.buf.len();
        self.pushes += 1;
        // Re-anchor the running sum once per lap to bound rounding drift.
        if self.pushes.is_multiple_of(self.buf.len()) {
            self.resum();
        }
    }

    /// Trapezoid integral of the stored window with step `dt`.
    pub fn trapezoid(&self, dt: f64) -> f64 {
        dt * (self.sum - 0.5 * (self.oldest() + self.newest()))
    }

    /// Sample `k` steps back (0 = newest).
    pub fn lag(&self, k: usize) -> f64 {
        let len = self.buf.len();
        self.buf[(self.head + len - 1 - k % len) % len]
    }
}

/// Uniformly sampled signal history with linear interpolation.
#[derive(Debug, Clone)]
pub struct History {
    buf: Vec<f64>,
    dt: f64,
    newest_step: i64,
}

impl History {
    pub fn new(capacity: usize, dt: f64, value: f64) -> Self {
        Self { buf: vec![value; capacity.max(2)], dt, newest_step: 0 }
    }

    pub fn fill_with(&mut self, f: impl Fn(f64) -> f64) {
        let cap = self.buf.len() as i64;
        for s in (self.newest_step - cap + 1)..=self.newest_step {
            let idx = s.rem_euclid(cap) as usize;
            self.buf[idx] = f(s as f64 * self.dt);
        }
    }

    pub fn push(&mut self, v: f64) {
        self.newest_step += 1;
        let cap = self.buf.len() as i64;
        self.buf[self.newest_step.rem_euclid(cap) as usize] = v;
    }

    pub fn now(&self) -> f64 {
        self.newest_step as f64 * self.dt
    }

    pub fn lag(&self, k: usize) -> f64 {
        let cap = self.buf.len() as i64;
        self.buf[(self.newest_step - k as i64).rem_euclid(cap) as usize]
    }

    /// Value at absolute time `t`, clamped to the stored span.
    pub fn at(&self, t: f64) -> f64 {
        let cap = self.buf.len() as i64;
        let oldest = self.newest_step - cap + 1;
        let x = t / self.dt;
        let s = x.floor() as i64;
        if s >= self.newest_step {
            return self.lag(0);
        }
        if s < oldest {
            return self.buf[oldest.rem_euclid(cap) as usize];
        }
        let f = x - s as f64;
        let a = self.buf[s.rem_euclid(cap) as usize];
        let b = self.buf[(s + 1).rem_euclid(cap) as usize];
        a + f * (b - a)
    }
}

/// `Theta(t) = theta(t - D(t))`.
#[derive(Debug, Clone)]
pub struct VariableDelay {
    pub profile: DelayProfile,
    hist: History,
}

impl VariableDelay {
    pub fn new(profile: DelayProfile, dt: f64, value: f64) -> Self {
        let cap = (profile.max() / dt).ceil() as usize + 4;
        Self { profile, hist: History::new(cap, dt, value) }
    }

    pub fn fill_with(&mut self, f: impl Fn(f64) -> f64) {
        self.hist.fill_with(f);
    }

    pub fn output(&self) -> f64 {
        let t = self.hist.now();
        self.hist.at(self.profile.phi(t))
    }

    pub fn advance(&mut self, theta_next: f64) {
        self.hist.push(theta_next);
    }
}

/// `Theta(t) = int_0^D theta(t - s) dbeta(s)`.
#[derive(Debug, Clone)]
pub struct DistributedDelay {
    weights: Vec<f64>,
    hist: History,
}

impl DistributedDelay {
    pub fn new(cdf: &LagCdf, dt: f64, value: f64) -> Self {
        let weights = cdf.grid_weights(dt);
        let hist = History::new(weights.len() + 1, dt, value);
        Self { weights, hist }
    }

    pub fn fill_with(&mut self, f: impl Fn(f64) -> f64) {
        self.hist.fill_with(f);
    }

    pub fn output(&self) -> f64 {
        self.weights.iter().enumerate().map(|(m, w)| w * self.hist.lag(m)).sum()
    }

    pub fn advance(&mut self, theta_next: f64) {
        self.hist.push(theta_next);
    }
}
