//! Exact continuous-time simulation by Poisson thinning, and the Girsanov
//! log-weight between the tilted and symmetric path measures.
//!
//! Each event index carries a time-independent dominating rate (discordant
//! bonds: `N^2 e^{2 ||grad H|| / N}`, boundary flips: `(N/A) e^{||H||}` and
//! `(N/B) e^{||H||}`), kept in a binary-indexed tree for O(log N) selection.
//! Candidate times form a homogeneous Poisson stream for the frozen
//! configuration, so a pending candidate survives pauses at checkpoint times
//! without re-drawing; trajectories are reproducible bit-for-bit from
//! (seed, stream) regardless of how the caller slices the horizon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::config::LatticeConfiguration;
use super::field::{FieldKind, TiltField};
use super::rates::{bond_tilt, left_flip_rate, right_flip_rate, EventKind};
use super::ModelError;
use crate::params::ReservoirParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub kind: EventKind,
}

/// Event log of one trajectory with its accumulated Girsanov log-weight.
#[derive(Debug, Clone)]
pub struct JumpPath {
    pub events: Vec<JumpEvent>,
    pub initial: LatticeConfiguration,
    pub horizon: f64,
    /// `log dP^H/dP` along the trajectory; exactly zero for a zero field.
    pub log_weight: f64,
    pub rng_seed: u64,
    pub rng_stream: u64,
}

impl JumpPath {
    pub fn final_config(&self) -> LatticeConfiguration {
        let mut c = self.initial.clone();
        for e in &self.events {
            apply_event(&mut c, e.kind);
        }
        c
    }

    /// Configuration at time `t` (left limit at event times).
    pub fn config_at(&self, t: f64) -> LatticeConfiguration {
        let mut c = self.initial.clone();
        for e in &self.events {
            if e.time > t {
                break;
            }
            apply_event(&mut c, e.kind);
        }
        c
    }
}

#[inline]
fn apply_event(config: &mut LatticeConfiguration, kind: EventKind) {
    match kind {
        EventKind::Bond(b) => config.exchange(b as usize),
        EventKind::LeftFlip => config.flip(0),
        EventKind::RightFlip => {
            let last = config.sites() - 1;
            config.flip(last)
        }
    }
}

// ---------------------------------------------------------------------------
// Fenwick tree over per-event dominating rates

struct Fenwick {
    tree: Vec<f64>,
    rates: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0.0; n + 1],
            rates: vec![0.0; n],
        }
    }

    fn set(&mut self, i: usize, rate: f64) {
        let delta = rate - self.rates[i];
        if delta == 0.0 {
            return;
        }
        self.rates[i] = rate;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    #[inline]
    fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    fn total(&self) -> f64 {
        let mut j = self.tree.len() - 1;
        let mut acc = 0.0;
        while j > 0 {
            acc += self.tree[j];
            j &= j - 1;
        }
        acc
    }

    /// Largest index whose prefix sum does not exceed `target`.
    fn search(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0usize;
        let mut mask = n.next_power_of_two();
        while mask > 0 {
            let next = pos + mask;
            if next <= n && self.tree[next] < target {
                target -= self.tree[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(n - 1)
    }
}

// ---------------------------------------------------------------------------
// Girsanov weight engine

/// Time profile of a separable field `H(t,x) = g(x) tau(t)`.
#[derive(Debug, Clone, Copy)]
enum Tempo {
    One,
    Ramp(f64),
}

impl Tempo {
    #[inline]
    fn value(&self, t: f64) -> f64 {
        match self {
            Tempo::One => 1.0,
            Tempo::Ramp(r) => (t / r).min(1.0),
        }
    }
}

enum BulkEngine {
    /// Separable field: maintain the moment sums `m[k] = sum_disc (-s_b d_b)^k`
    /// over discordant bonds incrementally, so an interval costs O(1).
    Moments {
        delta: Vec<f64>,
        signs: Vec<i8>,
        tempo: Tempo,
        m: [f64; 6],
    },
    /// General field: per-interval scan of the discordant bonds.
    PerBond,
}

struct WeightEngine {
    params: ReservoirParams,
    field: TiltField,
    n_scale: usize,
    n2: f64,
    g_left: f64,  // spatial part at x = 1/N (separable case)
    g_right: f64, // spatial part at x = 1 - 1/N
    bulk: BulkEngine,
    log_weight: f64,
}

type SeparableSpatial = Option<(Box<dyn Fn(f64) -> f64>, Tempo)>;

impl WeightEngine {
    fn new(field: &TiltField, params: &ReservoirParams, config: &LatticeConfiguration) -> Self {
        let n_scale = config.n_scale();
        let n = n_scale as f64;
        let spatial: SeparableSpatial = match &field.kind {
            FieldKind::Zero => Some((Box::new(|_| 0.0), Tempo::One)),
            FieldKind::Affine { slope } => {
                let s = *slope;
                Some((Box::new(move |x| s * x), Tempo::One))
            }
            FieldKind::Sine {
                amplitude,
                mode,
                ramp,
            } => {
                let (a, k) = (*amplitude, *mode as f64 * std::f64::consts::PI);
                Some((Box::new(move |x| a * (k * x).sin()), Tempo::Ramp(*ramp)))
            }
            FieldKind::Tabulated { .. } => None,
        };
        let (g_left, g_right, bulk) = match spatial {
            Some((g, tempo)) => {
                let bonds = config.sites() - 1;
                let delta: Vec<f64> = (0..bonds)
                    .map(|b| g((b + 2) as f64 / n) - g((b + 1) as f64 / n))
                    .collect();
                let mut engine = BulkEngine::Moments {
                    delta,
                    signs: vec![0; bonds],
                    tempo,
                    m: [0.0; 6],
                };
                if let BulkEngine::Moments {
                    delta, signs, m, ..
                } = &mut engine
                {
                    for b in 0..bonds {
                        let s = bond_sign(config, b);
                        signs[b] = s;
                        add_moment(m, delta[b], s, 1.0);
                    }
                }
                (g(1.0 / n), g(1.0 - 1.0 / n), engine)
            }
            None => (0.0, 0.0, BulkEngine::PerBond),
        };
        Self {
            params: *params,
            field: field.clone(),
            n_scale,
            n2: n * n,
            g_left,
            g_right,
            bulk,
            log_weight: 0.0,
        }
    }

    /// `eta_{b+1} - eta_b` dependent jump ratio exponent for a discordant bond.
    fn bond_log_ratio(&self, config: &LatticeConfiguration, b: usize, t: f64) -> f64 {
        match &self.bulk {
            BulkEngine::Moments { delta, tempo, .. } => {
                let s = bond_sign(config, b) as f64;
                -s * delta[b] * tempo.value(t)
            }
            BulkEngine::PerBond => {
                bond_tilt(&self.field, t, self.n_scale, b, config.occupied(b)).ln()
            }
        }
    }

    fn h_left(&self, t: f64) -> f64 {
        match &self.bulk {
            BulkEngine::Moments { tempo, .. } => self.g_left * tempo.value(t),
            BulkEngine::PerBond => self.field.value(t, 1.0 / self.n_scale as f64),
        }
    }

    fn h_right(&self, t: f64) -> f64 {
        match &self.bulk {
            BulkEngine::Moments { tempo, .. } => self.g_right * tempo.value(t),
            BulkEngine::PerBond => self.field.value(t, 1.0 - 1.0 / self.n_scale as f64),
        }
    }

    /// Jump contribution `log(tilted rate / symmetric rate)` at an accepted
    /// event, evaluated in the pre-jump configuration.
    fn record_jump(&mut self, config: &LatticeConfiguration, t: f64, kind: EventKind) {
        let term = match kind {
            EventKind::Bond(b) => self.bond_log_ratio(config, b as usize, t),
            EventKind::LeftFlip => {
                if config.occupied(0) {
                    -self.h_left(t)
                } else {
                    self.h_left(t)
                }
            }
            EventKind::RightFlip => {
                if config.occupied(config.sites() - 1) {
                    -self.h_right(t)
                } else {
                    self.h_right(t)
                }
            }
        };
        self.log_weight += term;
    }

    /// Compensator `-(R^H - R)` integrated over `[a, b]` while the
    /// configuration is frozen; midpoint rule in time (the integrand is
    /// smooth on the interval and intervals are O(1/N^3) long).
    fn record_interval(&mut self, config: &LatticeConfiguration, a: f64, b: f64) {
        if b <= a {
            return;
        }
        let mid = 0.5 * (a + b);
        let bulk_excess = match &self.bulk {
            BulkEngine::Moments { tempo, m, .. } => {
                let tau = tempo.value(mid);
                let mut p = tau;
                let mut fact = 1.0;
                let mut acc = 0.0;
                for (k, mk) in m.iter().enumerate() {
                    fact *= (k + 1) as f64;
                    acc += mk * p / fact;
                    p *= tau;
                }
                self.n2 * acc
            }
            BulkEngine::PerBond => {
                let n = self.n_scale as f64;
                let mut acc = 0.0;
                let mut h_prev = self.field.value(mid, 1.0 / n);
                for b in 0..config.sites() - 1 {
                    let h_next = self.field.value(mid, (b + 2) as f64 / n);
                    let s = bond_sign(config, b);
                    if s != 0 {
                        acc += f64::exp_m1(-(s as f64) * (h_next - h_prev));
                    }
                    h_prev = h_next;
                }
                self.n2 * acc
            }
        };
        let hl = self.h_left(mid);
        let hr = self.h_right(mid);
        let left_excess =
            left_flip_rate(config, &self.params, hl) - left_flip_rate(config, &self.params, 0.0);
        let right_excess =
            right_flip_rate(config, &self.params, hr) - right_flip_rate(config, &self.params, 0.0);
        self.log_weight -= (b - a) * (bulk_excess + left_excess + right_excess);
    }

    /// Moment-bookkeeping after an event changed the configuration; bonds
    /// adjacent to the touched sites are refreshed.
    fn apply_event(&mut self, config_after: &LatticeConfiguration, kind: EventKind) {
        let bonds = config_after.sites() - 1;
        if let BulkEngine::Moments {
            delta, signs, m, ..
        } = &mut self.bulk
        {
            let touch = |b: i64| -> Option<usize> {
                if b >= 0 && (b as usize) < bonds {
                    Some(b as usize)
                } else {
                    None
                }
            };
            let affected: [Option<usize>; 3] = match kind {
                EventKind::Bond(b) => {
                    let b = b as i64;
                    [touch(b - 1), touch(b), touch(b + 1)]
                }
                EventKind::LeftFlip => [touch(0), None, None],
                EventKind::RightFlip => [touch(bonds as i64 - 1), None, None],
            };
            for b in affected.into_iter().flatten() {
                add_moment(m, delta[b], signs[b], -1.0);
                let s = bond_sign(config_after, b);
                signs[b] = s;
                add_moment(m, delta[b], s, 1.0);
            }
        }
    }
}

#[inline]
fn bond_sign(config: &LatticeConfiguration, b: usize) -> i8 {
    match (config.occupied(b), config.occupied(b + 1)) {
        (true, false) => -1, // eta_{b+1} - eta_b
        (false, true) => 1,
        _ => 0,
    }
}

/// Adds (or removes, `sign = -1.0`) the contribution of a bond with
/// occupation step `s` to the moment sums `m[k] = sum (-s d)^k`.
#[inline]
fn add_moment(m: &mut [f64; 6], delta: f64, s: i8, sign: f64) {
    if s == 0 {
        return;
    }
    let z = -(s as f64) * delta;
    let mut p = z;
    for mk in m.iter_mut() {
        *mk += sign * p;
        p *= z;
    }
}

// ---------------------------------------------------------------------------
// Simulator

/// Event-driven simulator; pausing at intermediate times does not perturb the
/// realized trajectory.
pub struct Simulator<'a> {
    params: ReservoirParams,
    field: Option<&'a TiltField>,
    config: LatticeConfiguration,
    t: f64,
    horizon: f64,
    tree: Fenwick,
    dom_bond: f64,
    rng: ChaCha12Rng,
    weight: Option<WeightEngine>,
    weight_anchor: f64,
    pending_candidate: Option<f64>,
    finished: bool,
    n2: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(
        initial: LatticeConfiguration,
        params: &ReservoirParams,
        field: Option<&'a TiltField>,
        horizon: f64,
        seed: u64,
        stream: u64,
    ) -> Result<Self, ModelError> {
        assert!(horizon >= 0.0);
        if let Some(f) = field {
            f.check_bounds(horizon)?;
            if let FieldKind::Tabulated { t_final, .. } = f.kind {
                if t_final < horizon {
                    return Err(ModelError::HorizonMismatch {
                        path: horizon,
                        field: t_final,
                    });
                }
            }
        }
        let n = initial.n_scale() as f64;
        let sites = initial.sites();
        let (sup_v, sup_g) = field
            .map(|f| (f.sup_value, f.sup_gradient))
            .unwrap_or((0.0, 0.0));
        let dom_bond = n * n * (2.0 * sup_g / n).exp();
        let dom_left = n / params.cap_a * sup_v.exp();
        let dom_right = n / params.cap_b * sup_v.exp();
        let mut tree = Fenwick::new(sites + 1);
        for b in 0..sites - 1 {
            if initial.occupied(b) != initial.occupied(b + 1) {
                tree.set(b, dom_bond);
            }
        }
        tree.set(sites - 1, dom_left);
        tree.set(sites, dom_right);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let weight = field.map(|f| WeightEngine::new(f, params, &initial));
        Ok(Self {
            params: *params,
            field,
            config: initial,
            t: 0.0,
            horizon,
            tree,
            dom_bond,
            rng,
            weight,
            weight_anchor: 0.0,
            pending_candidate: None,
            finished: false,
            n2: n * n,
        })
    }

    #[inline]
    pub fn config(&self) -> &LatticeConfiguration {
        &self.config
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn log_weight(&self) -> f64 {
        self.weight.as_ref().map(|w| w.log_weight).unwrap_or(0.0)
    }

    fn true_rate(&self, index: usize, t: f64) -> f64 {
        let sites = self.config.sites();
        if index < sites - 1 {
            let (l, r) = (self.config.occupied(index), self.config.occupied(index + 1));
            if l == r {
                return 0.0;
            }
            match self.field {
                None => self.n2,
                Some(f) => self.n2 * bond_tilt(f, t, self.config.n_scale(), index, l),
            }
        } else if index == sites - 1 {
            let h = self
                .field
                .map(|f| f.value(t, 1.0 / self.config.n_scale() as f64))
                .unwrap_or(0.0);
            left_flip_rate(&self.config, &self.params, h)
        } else {
            let h = self
                .field
                .map(|f| f.value(t, 1.0 - 1.0 / self.config.n_scale() as f64))
                .unwrap_or(0.0);
            right_flip_rate(&self.config, &self.params, h)
        }
    }

    /// Advances to `t_stop` (clamped to the horizon), invoking `on_event`
    /// after each accepted event with the post-event configuration.
    pub fn run_until(
        &mut self,
        t_stop: f64,
        mut on_event: impl FnMut(&JumpEvent, &LatticeConfiguration),
    ) {
        let t_stop = t_stop.min(self.horizon);
        loop {
            let candidate = match self.pending_candidate {
                Some(c) => c,
                None => {
                    let total = self.tree.total();
                    let u: f64 = self.rng.random();
                    let c = self.t + (-(1.0 - u).ln()) / total;
                    self.pending_candidate = Some(c);
                    c
                }
            };
            if candidate > t_stop {
                self.t = t_stop;
                if t_stop >= self.horizon && !self.finished {
                    if let Some(w) = self.weight.as_mut() {
                        w.record_interval(&self.config, self.weight_anchor, self.horizon);
                        self.weight_anchor = self.horizon;
                    }
                    self.finished = true;
                }
                return;
            }
            self.pending_candidate = None;
            self.t = candidate;
            let total = self.tree.total();
            let target = self.rng.random::<f64>() * total;
            let index = self.tree.search(target);
            let dom = self.tree.rate(index);
            if dom <= 0.0 {
                continue;
            }
            let rate = self.true_rate(index, candidate);
            debug_assert!(rate <= dom * (1.0 + 1e-9), "dominating rate violated");
            if rate < dom && self.rng.random::<f64>() * dom >= rate {
                continue; // thinned
            }
            let sites = self.config.sites();
            let kind = if index < sites - 1 {
                EventKind::Bond(index as u32)
            } else if index == sites - 1 {
                EventKind::LeftFlip
            } else {
                EventKind::RightFlip
            };
            if let Some(w) = self.weight.as_mut() {
                w.record_interval(&self.config, self.weight_anchor, candidate);
                w.record_jump(&self.config, candidate, kind);
                self.weight_anchor = candidate;
            }
            apply_event(&mut self.config, kind);
            if let Some(w) = self.weight.as_mut() {
                w.apply_event(&self.config, kind);
            }
            self.refresh_tree(kind);
            let event = JumpEvent {
                time: candidate,
                kind,
            };
            on_event(&event, &self.config);
        }
    }

    fn refresh_tree(&mut self, kind: EventKind) {
        let sites = self.config.sites();
        let refresh_bond =
            |tree: &mut Fenwick, config: &LatticeConfiguration, dom: f64, b: usize| {
                let disc = config.occupied(b) != config.occupied(b + 1);
                tree.set(b, if disc { dom } else { 0.0 });
            };
        match kind {
            EventKind::Bond(b) => {
                let b = b as usize;
                if b > 0 {
                    refresh_bond(&mut self.tree, &self.config, self.dom_bond, b - 1);
                }
                refresh_bond(&mut self.tree, &self.config, self.dom_bond, b);
                if b + 1 < sites - 1 {
                    refresh_bond(&mut self.tree, &self.config, self.dom_bond, b + 1);
                }
            }
            EventKind::LeftFlip => refresh_bond(&mut self.tree, &self.config, self.dom_bond, 0),
            EventKind::RightFlip => {
                refresh_bond(&mut self.tree, &self.config, self.dom_bond, sites - 2)
            }
        }
    }

    /// Runs to the horizon and returns the final configuration and weight.
    pub fn finish(
        mut self,
        mut on_event: impl FnMut(&JumpEvent, &LatticeConfiguration),
    ) -> (LatticeConfiguration, f64) {
        self.run_until(self.horizon, &mut on_event);
        let w = self.log_weight();
        (self.config, w)
    }
}

/// Simulates one trajectory and collects the full event log.
pub fn simulate(
    initial: LatticeConfiguration,
    params: &ReservoirParams,
    field: Option<&TiltField>,
    horizon: f64,
    seed: u64,
    stream: u64,
) -> Result<JumpPath, ModelError> {
    let start = initial.clone();
    let mut sim = Simulator::new(initial, params, field, horizon, seed, stream)?;
    let mut events = Vec::new();
    sim.run_until(horizon, |e, _| events.push(*e));
    Ok(JumpPath {
        events,
        initial: start,
        horizon,
        log_weight: sim.log_weight(),
        rng_seed: seed,
        rng_stream: stream,
    })
}

/// Recomputes `log dP^H/dP` for a stored path by replaying it through the
/// same accumulator the simulator uses; measure-agnostic.
pub fn girsanov_log_weight(
    path: &JumpPath,
    params: &ReservoirParams,
    field: &TiltField,
) -> Result<f64, ModelError> {
    girsanov_log_weight_window(path, params, field, 0.0, path.horizon)
}

/// Windowed variant: the weight accumulated over `[from, to]` (absolute path
/// times); jump terms count events with `from < time <= to`.
pub fn girsanov_log_weight_window(
    path: &JumpPath,
    params: &ReservoirParams,
    field: &TiltField,
    from: f64,
    to: f64,
) -> Result<f64, ModelError> {
    if let FieldKind::Tabulated { t_final, .. } = field.kind {
        if t_final < path.horizon {
            return Err(ModelError::HorizonMismatch {
                path: path.horizon,
                field: t_final,
            });
        }
    }
    assert!(from >= 0.0 && to <= path.horizon && from <= to);
    let mut config = path.initial.clone();
    let mut engine = WeightEngine::new(field, params, &config);
    let mut cursor = from;
    for e in &path.events {
        if e.time <= from {
            apply_event(&mut config, e.kind);
            engine.apply_event(&config, e.kind);
            continue;
        }
        if e.time > to {
            break;
        }
        engine.record_interval(&config, cursor, e.time);
        engine.record_jump(&config, e.time, e.kind);
        apply_event(&mut config, e.kind);
        engine.apply_event(&config, e.kind);
        cursor = e.time;
    }
    engine.record_interval(&config, cursor, to);
    Ok(engine.log_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_profile;

    fn params() -> ReservoirParams {
        ReservoirParams::new(0.3, 0.7, 1.0, 2.0).unwrap()
    }

    #[test]
    fn zero_horizon_means_no_events() {
        let init = sample_profile(|_| 0.5, 16, 1);
        let path = simulate(init, &params(), None, 0.0, 1, 0).unwrap();
        assert!(path.events.is_empty());
        assert_eq!(path.log_weight, 0.0);
    }

    #[test]
    fn identical_seeds_give_identical_paths() {
        let init = sample_profile(|_| 0.5, 32, 5);
        let field = TiltField::sine(0.3, 1, 0.05);
        let a = simulate(init.clone(), &params(), Some(&field), 0.4, 11, 3).unwrap();
        let b = simulate(init, &params(), Some(&field), 0.4, 11, 3).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        assert!(a.events.iter().zip(&b.events).all(|(x, y)| x == y));
        assert_eq!(a.log_weight, b.log_weight);
    }

    #[test]
    fn pausing_does_not_change_the_trajectory() {
        let init = sample_profile(|x| x, 24, 9);
        let field = TiltField::affine(0.5);
        let reference = simulate(init.clone(), &params(), Some(&field), 0.3, 7, 0).unwrap();
        let mut sim = Simulator::new(init, &params(), Some(&field), 0.3, 7, 0).unwrap();
        let mut events = Vec::new();
        for k in 1..=10 {
            sim.run_until(0.03 * k as f64, |e, _| events.push(*e));
        }
        sim.run_until(0.3, |e, _| events.push(*e));
        assert_eq!(events.len(), reference.events.len());
        assert!(events.iter().zip(&reference.events).all(|(x, y)| x == y));
        assert!((sim.log_weight() - reference.log_weight).abs() < 1e-12);
    }

    #[test]
    fn bond_events_preserve_particle_count() {
        let init = sample_profile(|_| 0.5, 24, 2);
        let mut count = init.particle_count() as i64;
        let path = simulate(init, &params(), None, 0.2, 3, 0).unwrap();
        let mut config = path.initial.clone();
        for e in &path.events {
            let before = config.particle_count() as i64;
            apply_event(&mut config, e.kind);
            let after = config.particle_count() as i64;
            match e.kind {
                EventKind::Bond(_) => assert_eq!(before, after),
                _ => assert_eq!((before - after).abs(), 1),
            }
            count = after;
        }
        assert_eq!(count, path.final_config().particle_count() as i64);
    }

    #[test]
    fn event_times_strictly_increase() {
        let init = sample_profile(|_| 0.5, 32, 4);
        let path = simulate(init, &params(), None, 0.1, 5, 0).unwrap();
        assert!(path.events.windows(2).all(|w| w[0].time < w[1].time));
        assert!(!path.events.is_empty());
    }

    #[test]
    fn zero_field_weight_is_exactly_zero() {
        let init = sample_profile(|_| 0.5, 16, 6);
        let field = TiltField::zero();
        let path = simulate(init, &params(), Some(&field), 0.2, 8, 0).unwrap();
        assert_eq!(path.log_weight, 0.0);
        assert_eq!(girsanov_log_weight(&path, &params(), &field).unwrap(), 0.0);
    }

    #[test]
    fn replay_matches_online_accumulation() {
        let init = sample_profile(|_| 0.4, 24, 12);
        let field = TiltField::sine(0.4, 1, 0.1);
        let path = simulate(init, &params(), Some(&field), 0.25, 21, 2).unwrap();
        let replayed = girsanov_log_weight(&path, &params(), &field).unwrap();
        assert!(
            (replayed - path.log_weight).abs() < 1e-10 * (1.0 + path.log_weight.abs()),
            "{replayed} vs {}",
            path.log_weight
        );
    }

    #[test]
    fn weight_is_additive_under_time_splits() {
        let init = sample_profile(|_| 0.5, 20, 3);
        let field = TiltField::affine(0.8);
        let p = params();
        let path = simulate(init, &p, Some(&field), 0.3, 17, 1).unwrap();
        let total = girsanov_log_weight(&path, &p, &field).unwrap();
        let s = 0.137;
        let first = girsanov_log_weight_window(&path, &p, &field, 0.0, s).unwrap();
        let second = girsanov_log_weight_window(&path, &p, &field, s, 0.3).unwrap();
        assert!((first + second - total).abs() < 1e-11 * (1.0 + total.abs()));
    }

    #[test]
    fn single_flip_closed_form() {
        // N = 3, both sites empty, constant field h; freeze the path with a
        // single left flip at time t1 and compare against the hand computation
        let p = ReservoirParams::new(0.3, 0.3, 1.0, 1.0).unwrap();
        let n = 3usize;
        let h = 0.7;
        let field = TiltField::tabulated(1.0, 2, 2, vec![h; 6]);
        let t1 = 0.4;
        let horizon = 1.0;
        let initial = LatticeConfiguration::empty(n);
        let path = JumpPath {
            events: vec![JumpEvent {
                time: t1,
                kind: EventKind::LeftFlip,
            }],
            initial,
            horizon,
            log_weight: f64::NAN,
            rng_seed: 0,
            rng_stream: 0,
        };
        let got = girsanov_log_weight(&path, &p, &field).unwrap();
        // jump term: +h (injection). compensator: bond rates cancel (constant
        // field), boundary excess = (N/A)[e^h a + e^{-h}(1-a)] - N/A per empty
        // or occupied site bookkeeping:
        let nf = n as f64;
        let empty_left = nf / p.cap_a * (h.exp() * p.alpha) - nf / p.cap_a * p.alpha;
        let occ_left =
            nf / p.cap_a * ((-h).exp() * (1.0 - p.alpha)) - nf / p.cap_a * (1.0 - p.alpha);
        let empty_right = nf / p.cap_b * (h.exp() * p.beta) - nf / p.cap_b * p.beta;
        let expected =
            h - (t1 * (empty_left + empty_right) + (horizon - t1) * (occ_left + empty_right));
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn rejects_field_with_lying_bounds() {
        let lying = TiltField::with_declared_bounds(FieldKind::Affine { slope: 1.0 }, 0.01, 1.0);
        let init = sample_profile(|_| 0.5, 16, 1);
        let err = simulate(init, &params(), Some(&lying), 0.1, 1, 0);
        assert!(matches!(err, Err(ModelError::FieldBounds { .. })));
    }

    #[test]
    fn rejects_horizon_beyond_tabulated_field() {
        let field = TiltField::tabulated(0.5, 3, 4, vec![0.0; 15]);
        let init = sample_profile(|_| 0.5, 16, 1);
        let err = simulate(init, &params(), Some(&field), 1.0, 1, 0);
        assert!(matches!(err, Err(ModelError::HorizonMismatch { .. })));
    }

    #[test]
    fn stationary_occupation_under_equal_reservoirs() {
        // alpha = beta = 1/2 makes Bernoulli(1/2) invariant; site occupation
        // averaged over replicas stays at 1/2 within 3 standard errors
        let p = ReservoirParams::new(0.5, 0.5, 1.0, 1.0).unwrap();
        let n = 8usize;
        let replicas = 2000;
        let mut occupied = vec![0.0_f64; n - 1];
        for r in 0..replicas {
            let init = sample_profile(|_| 0.5, n, 1000 + r);
            let path = simulate(init, &p, None, 0.5, 77, r).unwrap();
            let fin = path.final_config();
            for (k, o) in occupied.iter_mut().enumerate() {
                if fin.occupied(k) {
                    *o += 1.0;
                }
            }
        }
        let se = 0.5 / (replicas as f64).sqrt();
        for (k, o) in occupied.iter().enumerate() {
            let mean = o / replicas as f64;
            assert!((mean - 0.5).abs() < 3.5 * se, "site {k}: {mean}");
        }
    }
}
