/// Order in which a single-layer run replays stacked actions: layer `ℓ` at
/// stacked time `t` happens at `τ = (t - 1) N + ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterleaveSchedule {
    pub layers: usize,
    pub stacked_uses: usize,
}

impl InterleaveSchedule {
    pub fn new(layers: usize, stacked_uses: usize) -> Self {
        Self {
            layers,
            stacked_uses,
        }
    }

    pub fn total_time(&self) -> usize {
        self.layers * self.stacked_uses
    }

    /// `(layer, t)` to `τ`, all 1-based.
    pub fn tau(&self, layer: usize, t: usize) -> usize {
        (t - 1) * self.layers + layer
    }

    /// `τ` to `(layer, t)`.
    pub fn inverse(&self, tau: usize) -> (usize, usize) {
        ((tau - 1) % self.layers + 1, (tau - 1) / self.layers + 1)
    }

    /// Every `τ` in `1..=Nn` is hit exactly once.
    pub fn is_bijective(&self) -> bool {
        let mut hit = vec![false; self.total_time()];
        for t in 1..=self.stacked_uses {
            for l in 1..=self.layers {
                let tau = self.tau(l, t);
                if tau == 0 || tau > hit.len() || hit[tau - 1] || self.inverse(tau) != (l, t) {
                    return false;
                }
                hit[tau - 1] = true;
            }
        }
        hit.into_iter().all(|h| h)
    }

    /// Every action of period `t - 1` precedes every action of period `t`.
    pub fn preserves_dependencies(&self) -> bool {
        (2..=self.stacked_uses).all(|t| {
            let latest_prev = (1..=self.layers).map(|l| self.tau(l, t - 1)).max().unwrap();
            let earliest = (1..=self.layers).map(|l| self.tau(l, t)).min().unwrap();
            latest_prev < earliest
        })
    }
}
