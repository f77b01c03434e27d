//! The iQCC outer loop and geometric extrapolation of its energies.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compression::compress;
use crate::dressing::{dress, dress_sequence, DressingStep};
use crate::error::{check_dims, IqccError, Result};
use crate::fermion::{fermionic_sd_pool, spin_penalize, Mapping};
use crate::operator::Operator;
use crate::optimize::{minimize, BfgsOptions};
use crate::pauli::PauliWord;
use crate::product_state::{energy_and_gradient, qmf_minimize, random_angles, BlochState};
use crate::screening::{
    build_dis, OperatorPool, PoolKind, StateExpectations, DEFAULT_GRAD_THRESHOLD,
};

pub const DEFAULT_ENERGY_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_DROP_FIRST: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IqccConfig {
    pub n_g: usize,
    pub n_steps: usize,
    pub pool: PoolKind,
    pub grad_threshold: f64,
    pub energy_threshold: f64,
    /// Compression threshold in hartree; `None` disables compression.
    pub epsilon: Option<f64>,
    /// Spin penalty; 0 disables it.
    pub mu: f64,
    pub n_random_guesses: usize,
    pub rng_seed: u64,
    /// Iterations skipped before the extrapolation fit.
    pub drop_first: usize,
}

impl Default for IqccConfig {
    fn default() -> Self {
        IqccConfig {
            n_g: 1,
            n_steps: 50,
            pool: PoolKind::Dis,
            grad_threshold: DEFAULT_GRAD_THRESHOLD,
            energy_threshold: DEFAULT_ENERGY_THRESHOLD,
            epsilon: None,
            mu: 0.0,
            n_random_guesses: crate::product_state::DEFAULT_GUESSES,
            rng_seed: 0,
            drop_first: DEFAULT_DROP_FIRST,
        }
    }
}

impl IqccConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(IqccError::InvalidArgument(m));
        if self.n_g == 0 {
            return bad("n_g must be >= 1".into());
        }
        if self.n_steps == 0 {
            return bad("n_steps must be >= 1".into());
        }
        if !(self.grad_threshold > 0.0) || !self.grad_threshold.is_finite() {
            return bad(format!(
                "grad_threshold must be positive, got {}",
                self.grad_threshold
            ));
        }
        if !(self.energy_threshold > 0.0) || !self.energy_threshold.is_finite() {
            return bad(format!(
                "energy_threshold must be positive, got {}",
                self.energy_threshold
            ));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) || !e.is_finite() {
                return bad(format!("epsilon must be positive, got {e}"));
            }
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return bad(format!("mu must be >= 0, got {}", self.mu));
        }
        if self.n_random_guesses == 0 {
            return bad("n_random_guesses must be >= 1".into());
        }
        Ok(())
    }
}

/// Optional inputs that cannot be derived from the qubit operator alone.
#[derive(Debug, Clone, Default)]
pub struct RunExtras {
    /// Qubit image of S², required when `mu > 0`.
    pub spin_squared: Option<Operator>,
    /// Explicit fermionic-SD pool words. Without them the pool is built for
    /// Jordan-Wigner with one qubit per spin orbital.
    pub pool_words: Option<Vec<PauliWord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 0 is the mean-field initialization.
    pub k: usize,
    pub energy: f64,
    pub generators: Vec<String>,
    pub amplitudes: Vec<f64>,
    /// Term count of the dressed Hamiltonian before and after compression.
    pub terms_before: usize,
    pub terms_after: usize,
    pub top_gradient: f64,
    /// Kept out of the serialized log so seeded runs reproduce byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientBelowThreshold,
    EnergyConverged,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub final_state: BlochState,
    pub final_hamiltonian: Operator,
    pub extrapolation: Option<ExtrapolationFit>,
    /// Why the fit was skipped, when it was.
    pub extrapolation_note: Option<String>,
}

impl RunOutcome {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map(|r| r.energy).unwrap_or(f64::NAN)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }
}

pub fn iqcc_run(h: &Operator, config: &IqccConfig) -> Result<RunOutcome> {
    iqcc_run_with(h, config, &RunExtras::default())
}

pub fn iqcc_run_with(h: &Operator, config: &IqccConfig, extras: &RunExtras) -> Result<RunOutcome> {
    config.validate()?;
    let n = h.n_qubits();
    let mut current = if config.mu > 0.0 {
        let s2 = extras.spin_squared.as_ref().ok_or_else(|| {
            IqccError::InvalidArgument("spin penalty requested without an S² operator".into())
        })?;
        check_dims(n, s2.n_qubits())?;
        spin_penalize(h, s2, config.mu)?
    } else {
        h.clone()
    };
    let pool = match config.pool {
        PoolKind::Dis => OperatorPool::Dis,
        PoolKind::TwoQubitPauli => OperatorPool::TwoQubitPauli { n_qubits: n },
        PoolKind::FermionicSd => match &extras.pool_words {
            Some(words) => {
                for w in words {
                    check_dims(n, w.n_qubits())?;
                }
                OperatorPool::FermionicSd(words.clone())
            }
            None => OperatorPool::FermionicSd(fermionic_sd_pool(n, Mapping::JordanWigner)?),
        },
    };

    let start = Instant::now();
    let qmf = qmf_minimize(&current, config.n_random_guesses, config.rng_seed)?;
    let mut state = qmf.state;
    let mut energy = qmf.energy;
    let mut records = vec![IterationRecord {
        k: 0,
        energy,
        generators: Vec::new(),
        amplitudes: Vec::new(),
        terms_before: current.len(),
        terms_after: current.len(),
        top_gradient: 0.0,
        wall_time: start.elapsed(),
    }];
    log_record(&records[0]);

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ 0x5851_f42d_4c95_7f2d);
    let mut termination = Termination::StepLimit;
    for k in 1..=config.n_steps {
        let started = Instant::now();
        let (generators, top_gradient) =
            select_generators(&current, &state, &pool, config, &mut rng)?;
        if top_gradient < config.grad_threshold || generators.is_empty() {
            termination = Termination::GradientBelowThreshold;
            break;
        }

        let step = optimize_step(&current, &generators, &state, config, &mut rng)?;
        let improvement = energy - step.energy;
        let steps: Vec<DressingStep> = generators
            .iter()
            .zip(&step.amplitudes)
            .map(|(p, t)| DressingStep::new(*p, *t))
            .collect();
        let dressed = dress_sequence(&current, &steps)?;
        let terms_before = dressed.len();
        current = match config.epsilon {
            Some(eps) => compress(&dressed, eps)?.0,
            None => dressed,
        };
        state = step.state;
        energy = step.energy;
        let record = IterationRecord {
            k,
            energy,
            generators: generators.iter().map(|w| w.to_string()).collect(),
            amplitudes: steps.iter().map(|s| s.tau).collect(),
            terms_before,
            terms_after: current.len(),
            top_gradient,
            wall_time: started.elapsed(),
        };
        log_record(&record);
        records.push(record);
        if improvement < config.energy_threshold {
            termination = Termination::EnergyConverged;
            break;
        }
    }

    let (extrapolation, extrapolation_note) = match extrapolate(&records, config.drop_first) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(RunOutcome {
        records,
        termination,
        final_state: state,
        final_hamiltonian: current,
        extrapolation,
        extrapolation_note,
    })
}

/// Upper bound on term-level products spent ranking DIS members per iteration.
pub const MEMBER_EVALUATION_BUDGET: usize = 1 << 27;

/// Picks up to `n_g` generators and reports the largest gradient seen.
///
/// Candidates come from the pool; with the DIS pool they are the members of
/// the gradient groups built on the purified reference. Every candidate is
/// scored by its gradient on the actual mean-field state, which coincides
/// with the purified-reference gradient when that state is a Z eigenstate.
/// For the DIS pool one member is taken per group: the best one, with ties
/// (always the case on a Z eigenstate) drawn at random.
pub fn select_generators<R: Rng>(
    h: &Operator,
    state: &BlochState,
    pool: &OperatorPool,
    config: &IqccConfig,
    rng: &mut R,
) -> Result<(Vec<PauliWord>, f64)> {
    let exps = StateExpectations::new(state);
    if let OperatorPool::Dis = pool {
        let groups = build_dis(h, &state.purify())?;
        let mut spent = 0usize;
        let mut scored: Vec<(f64, PauliWord)> = Vec::new();
        for (rank, g) in groups.iter().enumerate() {
            let cost = (g.size() as usize).saturating_mul(h.len().max(1));
            if rank >= config.n_g && spent.saturating_add(cost) > MEMBER_EVALUATION_BUDGET {
                log::debug!(
                    "member scoring stopped after {rank} of {} groups (budget)",
                    groups.len()
                );
                break;
            }
            spent = spent.saturating_add(cost);
            let mut best = 0.0f64;
            let mut ties: Vec<PauliWord> = Vec::new();
            for p in g.members() {
                let v = exps.gradient(h, &p)?.abs();
                if v > best * (1.0 + 1e-10) {
                    best = v;
                    ties.clear();
                    ties.push(p);
                } else if v >= best * (1.0 - 1e-10) {
                    ties.push(p);
                }
            }
            let pick = ties[rng.gen_range(0..ties.len())];
            scored.push((best, pick));
        }
        // Stable: equal scores keep the purified-reference order.
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let top = scored.first().map_or(0.0, |s| s.0);
        let picked = scored
            .into_iter()
            .filter(|s| s.0 > config.grad_threshold)
            .take(config.n_g)
            .map(|s| s.1)
            .collect();
        return Ok((picked, top));
    }
    let mut scored = Vec::new();
    for p in pool.members() {
        check_dims(h.n_qubits(), p.n_qubits())?;
        if p.y_parity() == crate::pauli::YParity::Odd {
            scored.push((exps.gradient(h, &p)?.abs(), p));
        }
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    scored.dedup_by(|a, b| a.1 == b.1);
    let top = scored.first().map_or(0.0, |s| s.0);
    let picked = scored
        .into_iter()
        .filter(|s| s.0 > config.grad_threshold)
        .take(config.n_g)
        .map(|s| s.1)
        .collect();
    Ok((picked, top))
}

fn log_record(r: &IterationRecord) {
    if log::log_enabled!(log::Level::Info) {
        log::info!("{}", serde_json::to_string(r).unwrap_or_default());
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    /// One amplitude per generator, in (-π, π].
    pub amplitudes: Vec<f64>,
    pub state: BlochState,
    pub energy: f64,
}

/// Energy of the product state `angles` on `h` dressed by `generators` at
/// `taus`, with the gradient in `[τ.., θ.., φ..]` layout.
pub(crate) fn dressed_energy_and_gradient(
    h: &Operator,
    generators: &[PauliWord],
    x: &[f64],
    grad: &mut [f64],
) -> Result<f64> {
    let g = generators.len();
    let (taus, angles) = x.split_at(g);
    let mut chain = Vec::with_capacity(g + 1);
    chain.push(h.clone());
    for (p, &t) in generators.iter().zip(taus) {
        let next = dress(chain.last().unwrap(), &DressingStep::new(*p, t))?;
        chain.push(next);
    }
    let (gtau, gang) = grad.split_at_mut(g);
    let energy = energy_and_gradient(&chain[g], angles, Some(gang));
    for j in 0..g {
        // d/dτ_j e^{iτP/2} H e^{-iτP/2} = -(i/2)[H(τ), P], then carried
        // through the later dressings (which are linear in H).
        let mut d = chain[j + 1].commutator_half(&generators[j])?;
        for i in j + 1..g {
            d = dress(&d, &DressingStep::new(generators[i], taus[i]))?;
        }
        gtau[j] = energy_and_gradient(&d, angles, None);
    }
    Ok(energy)
}

/// Joint minimization over the generator amplitudes and the Bloch angles.
/// Random starts come first, then `τ = 0` with the previous angles; the best
/// result wins, so the energy never exceeds that of `prev` on `h`.
pub fn optimize_step<R: Rng>(
    h: &Operator,
    generators: &[PauliWord],
    prev: &BlochState,
    config: &IqccConfig,
    rng: &mut R,
) -> Result<StepResult> {
    let n = h.n_qubits();
    check_dims(n, prev.n_qubits())?;
    for p in generators {
        check_dims(n, p.n_qubits())?;
    }
    let g = generators.len();
    let mut starts = Vec::with_capacity(config.n_random_guesses + 1);
    for _ in 0..config.n_random_guesses {
        let mut x: Vec<f64> = (0..g).map(|_| rng.gen_range(-PI..PI)).collect();
        x.extend(random_angles(&mut *rng, n));
        starts.push(x);
    }
    let mut fallback = vec![0.0; g];
    fallback.extend(prev.packed());
    starts.push(fallback);

    let mut failure: Option<IqccError> = None;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x0 in starts {
        let m = minimize(
            |x, grad| match dressed_energy_and_gradient(h, generators, x, grad) {
                Ok(e) => e,
                Err(e) => {
                    failure.get_or_insert(e);
                    grad.iter_mut().for_each(|v| *v = 0.0);
                    f64::INFINITY
                }
            },
            x0,
            BfgsOptions::default(),
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if best.as_ref().is_none_or(|(e, _)| m.value < *e) {
            best = Some((m.value, m.x));
        }
    }
    let (_, x) = best.expect("at least the fallback start");
    let steps: Vec<DressingStep> = generators
        .iter()
        .zip(&x[..g])
        .map(|(p, t)| DressingStep::new(*p, *t))
        .collect();
    let state = BlochState::from_packed(n, &x[g..]);
    // Re-evaluated on the folded angles so the next iteration's fallback
    // start reproduces this value bit for bit.
    let energy = state.energy(&dress_sequence(h, &steps)?)?;
    let fallback_energy = prev.energy(h)?;
    if energy > fallback_energy {
        // Only reachable through rounding when nothing improved.
        return Ok(StepResult {
            amplitudes: vec![0.0; g],
            state: prev.clone(),
            energy: fallback_energy,
        });
    }
    Ok(StepResult {
        amplitudes: steps.iter().map(|s| s.tau).collect(),
        state,
        energy,
    })
}

/// Least-squares fit of `log10(E_{k-1} - E_k) = a'k + b'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationFit {
    pub a_prime: f64,
    pub b_prime: f64,
    /// Parameters of `E_k - E_exact = 10^{ak + b}`.
    pub a: f64,
    pub b: f64,
    /// First and last iteration index whose difference entered the fit.
    pub window: (usize, usize),
    /// Extrapolated energy at the last iteration.
    pub estimate: f64,
    /// Root-mean-square residual of the fit, in decades.
    pub residual: f64,
}

pub fn extrapolate(records: &[IterationRecord], drop_first: usize) -> Result<ExtrapolationFit> {
    let kept: Vec<&IterationRecord> = records.iter().skip(drop_first).collect();
    if kept.len() < 5 {
        return Err(IqccError::FitRejected(format!(
            "{} energies after dropping {drop_first}; need at least 5",
            kept.len()
        )));
    }
    let mut ks = Vec::with_capacity(kept.len() - 1);
    let mut ys = Vec::with_capacity(kept.len() - 1);
    for pair in kept.windows(2) {
        let d = pair[0].energy - pair[1].energy;
        if !(d > 0.0) {
            return Err(IqccError::FitRejected(format!(
                "energy difference {d:e} at iteration {} is not positive",
                pair[1].k
            )));
        }
        ks.push(pair[1].k as f64);
        ys.push(d.log10());
    }
    let m = ks.len() as f64;
    let mk = ks.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = ks.iter().map(|k| (k - mk).powi(2)).sum();
    let sxy: f64 = ks.iter().zip(&ys).map(|(k, y)| (k - mk) * (y - my)).sum();
    let a_prime = sxy / sxx;
    let b_prime = my - a_prime * mk;
    if !(a_prime < 0.0) {
        return Err(IqccError::FitRejected(format!(
            "fitted slope {a_prime} is not negative"
        )));
    }
    let residual = (ks
        .iter()
        .zip(&ys)
        .map(|(k, y)| (y - a_prime * k - b_prime).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    // E_{k-1} - E_k = 10^{ak+b} (10^{-a} - 1)
    let a = a_prime;
    let b = b_prime - (10f64.powf(-a_prime) - 1.0).log10();
    let last = kept.last().unwrap();
    let estimate = last.energy - 10f64.powf(a * last.k as f64 + b);
    Ok(ExtrapolationFit {
        a_prime,
        b_prime,
        a,
        b,
        window: (kept[1].k, last.k),
        estimate,
        residual,
    })
}
