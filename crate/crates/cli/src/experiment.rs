//! Turning a config into bilinear tables and channel quantities.

use std::sync::Arc;

use udwq_core::channel::{
    assemble_rho_eb, bloch_grid, channel_coherent_information, classical_signaling, coherent_information,
    fine_tuned_rho_eb, negativity, to_dmatrix2, trace_distance, ProtocolSpec, QubitState, TwoQubitState,
    FINE_TUNING_TOL,
};
use udwq_core::field::{
    default_grid, mode_amplitude, smearing_amplitude, table_from_amplitudes, ModeAmplitude, Smearing, SmearingSpec,
    SpacetimeModel,
};
use udwq_core::grid::KGrid;
use udwq_core::protocol::{
    bob_smearing_solve, solve_fine_tuning, solve_fine_tuning_auto, strong_coupling_margin, ProtocolConditions,
};
use udwq_core::weyl::BilinearTable;

use crate::config::{core_error, BobConfig, ExperimentConfig, GridKindConfig, Source};
use crate::error::{CliError, CliResult};

pub fn model_of(cfg: &ExperimentConfig, src: &Source) -> CliResult<SpacetimeModel> {
    SpacetimeModel::minkowski(cfg.model.dimension, cfg.model.mass).map_err(|e| src.core("model", e))
}

/// Bob's smearings when they do not depend on a solve, at the given couplings.
fn fixed_bob(cfg: &ExperimentConfig, lambda1: f64, lambda2: f64) -> Option<[Smearing; 2]> {
    match &cfg.bob {
        BobConfig::Explicit { g1, g2 } => Some([g1.to_spec().into(), g2.to_spec().into()]),
        BobConfig::Offset { offset, time } => {
            let t = time.unwrap_or(cfg.alice.time);
            let [p1, p2] = cfg.alice.profiles();
            Some([
                SmearingSpec::new(lambda1, cfg.alice.f1.at(t), p1.translated(offset).to_profile()).into(),
                SmearingSpec::new(lambda2, cfg.alice.f2.at(t), p2.translated(offset).to_profile()).into(),
            ])
        }
        BobConfig::Ideal | BobConfig::Solve { .. } => None,
    }
}

/// Grid from the config, or sized for Alice's and any fixed Bob smearings.
pub fn grid_of(cfg: &ExperimentConfig, model: &SpacetimeModel, src: &Source) -> CliResult<KGrid> {
    if let Some(g) = &cfg.grid {
        return match g.kind {
            GridKindConfig::Tensor => KGrid::tensor(cfg.model.dimension, g.cutoff, g.points),
            GridKindConfig::Radial => KGrid::radial(g.cutoff, g.points),
        }
        .map_err(|e| src.core("grid", e));
    }
    let [f1, f2] = cfg.alice.unit_specs();
    let mut all: Vec<Smearing> = vec![f1.into(), f2.into()];
    if let Some(b) = fixed_bob(cfg, 1.0, 1.0) {
        all.extend(b);
    }
    let refs: Vec<&Smearing> = all.iter().collect();
    default_grid(model, &refs).map_err(|e| src.core("alice", e))
}

/// The finest grid over a set of configs (sweeps share one grid).
pub fn shared_grid(cfgs: &[ExperimentConfig], model: &SpacetimeModel, src: &Source) -> CliResult<KGrid> {
    let mut best: Option<KGrid> = None;
    for c in cfgs {
        let g = grid_of(c, model, src)?;
        best = Some(match best {
            Some(b) if b.len() >= g.len() && b.cutoff() >= g.cutoff() => b,
            Some(b) if b.len() >= g.len() => match b.kind() {
                udwq_core::grid::GridKind::Radial => KGrid::radial(g.cutoff(), b.points_per_axis()),
                _ => KGrid::tensor(b.dimension(), g.cutoff(), b.points_per_axis()),
            }
            .map_err(|e| src.core("grid", e))?,
            _ => g,
        });
    }
    best.ok_or_else(|| src.error("sweep", "no configurations to evaluate"))
}

pub fn describe_grid(g: &KGrid) -> String {
    let kind = match g.kind() {
        udwq_core::grid::GridKind::Tensor => "tensor",
        udwq_core::grid::GridKind::Radial => "radial",
        udwq_core::grid::GridKind::Nodes => "nodes",
    };
    format!(
        "kind={kind} dimension={} cutoff={:.16e} points={} nodes={}",
        g.dimension(),
        g.cutoff(),
        g.points_per_axis(),
        g.len()
    )
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: Arc<KGrid>,
    pub cond: ProtocolConditions,
    pub lambda2: f64,
    pub c: f64,
    pub fine_tuned: bool,
    pub alice: [ModeAmplitude; 2],
    /// None when g = f
    pub bob: Option<[Smearing; 2]>,
    pub table: BilinearTable,
}

pub fn resolve(cfg: &ExperimentConfig, grid: Arc<KGrid>, src: &Source) -> CliResult<Resolved> {
    let model = model_of(cfg, src)?;
    let [f1, f2] = cfg.alice.unit_specs();
    let u1 = mode_amplitude(&model, &f1, &grid).map_err(|e| src.core("alice", e))?;
    let u2 = mode_amplitude(&model, &f2, &grid).map_err(|e| src.core("alice", e))?;
    let mut cond = ProtocolConditions::from_amplitudes(&u1, &u2, 0).map_err(|e| src.core("alice", e))?;
    let lambda2 = match (cfg.alice.lambda2, cfg.alice.lambda2_sq_w2) {
        (Some(l), _) => l,
        (None, Some(x)) => {
            if !(cond.w2 > 0.0) {
                return Err(src.error("lambda2_sq_w2", "f2 has W(f2, f2) = 0; set lambda2 directly"));
            }
            (x / cond.w2).sqrt()
        }
        (None, None) => return Err(src.error("alice", "missing coupling")),
    };
    let (c, fine_tuned) = match (cfg.alice.c, cfg.alice.branch) {
        (Some(c), _) => (c, false),
        (None, Some(n)) => {
            cond = cond.with_branch(n);
            (solve_fine_tuning(&cond, lambda2).map_err(|e| src.core("alice", e))?, true)
        }
        (None, None) => {
            let (picked, c) =
                solve_fine_tuning_auto(&cond, lambda2, cfg.alice.margin_threshold).map_err(|e| src.core("alice", e))?;
            cond = picked;
            (c, true)
        }
    };
    let a1 = u1.scaled(c * lambda2);
    let a2 = u2.scaled(lambda2);
    let (bob, g_amps) = match &cfg.bob {
        BobConfig::Ideal => (None, [a1.clone(), a2.clone()]),
        BobConfig::Solve { time } => {
            let g = bob_smearing_solve(&model, &a1, &a2, *time).map_err(|e| src.core("bob", e))?;
            let amps = [
                smearing_amplitude(&model, &g[0], &grid).map_err(|e| src.core("bob", e))?,
                smearing_amplitude(&model, &g[1], &grid).map_err(|e| src.core("bob", e))?,
            ];
            (Some(g), amps)
        }
        _ => {
            let g = fixed_bob(cfg, c * lambda2, lambda2).expect("explicit or offset bob");
            let amps = [
                smearing_amplitude(&model, &g[0], &grid).map_err(|e| src.core("bob", e))?,
                smearing_amplitude(&model, &g[1], &grid).map_err(|e| src.core("bob", e))?,
            ];
            (Some(g), amps)
        }
    };
    let [g1, g2] = g_amps;
    let table = table_from_amplitudes(&[a1.clone(), a2.clone(), g1, g2]).map_err(|e| src.core("alice", e))?;
    Ok(Resolved { grid, cond, lambda2, c, fine_tuned, alice: [a1, a2], bob, table })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub e12: f64,
    pub margin: f64,
    pub coherent_info: f64,
    pub channel_coherent_info: f64,
    pub negativity: f64,
    pub signaling: f64,
}

pub fn output_state(table: &BilinearTable) -> CliResult<TwoQubitState> {
    assemble_rho_eb(&ProtocolSpec::new(table.clone())).map_err(|e| core_error(e, None))
}

pub fn metrics(r: &Resolved) -> CliResult<Metrics> {
    let lift = |e| core_error(e, None);
    let spec = ProtocolSpec::new(r.table.clone());
    let rho = assemble_rho_eb(&spec).map_err(lift)?;
    let channel = |input: &TwoQubitState| assemble_rho_eb(&spec.with_input(input.clone()));
    let inputs = bloch_grid();
    let ic_channel = channel_coherent_information(channel, &inputs).map_err(lift)?;
    let signaling = classical_signaling(channel, &inputs).map_err(lift)?;
    if r.fine_tuned && r.bob.is_none() {
        let tilde = fine_tuned_rho_eb(&r.table, FINE_TUNING_TOL).map_err(lift)?;
        let dev = (rho.matrix() - tilde.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(CliError::contract(
                "fine-tuned closed form",
                format!("assembled output deviates from the tilde form by {dev:e}"),
            ));
        }
    }
    Ok(Metrics {
        e12: r.table.e()[(0, 1)],
        margin: strong_coupling_margin(&r.table),
        coherent_info: coherent_information(&rho),
        channel_coherent_info: ic_channel.max,
        negativity: negativity(&rho),
        signaling,
    })
}

/// Seeded (E, A) inputs: purifications of random mixed states and random
/// pure product inputs, alternating.
pub fn random_inputs(seed: u64, count: usize) -> Vec<TwoQubitState> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut v = [0.0f64; 3];
            loop {
                v.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
                let n2: f64 = v.iter().map(|x| x * x).sum();
                if n2 > 1e-6 && n2 <= 1.0 {
                    break;
                }
            }
            if i % 2 == 0 {
                QubitState::from_bloch(v).expect("inside the ball").purification()
            } else {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                QubitState::from_bloch([v[0] / n, v[1] / n, v[2] / n]).expect("on the sphere").with_trivial_environment()
            }
        })
        .collect()
}

/// Max pairwise ‖ρ_B(i) - ρ_B(j)‖₁ over (E, A) inputs.
pub fn input_dependence(table: &BilinearTable, inputs: &[TwoQubitState]) -> CliResult<f64> {
    let spec = ProtocolSpec::new(table.clone());
    let outs = inputs
        .iter()
        .map(|i| {
            assemble_rho_eb(&spec.with_input(i.clone()))
                .map(|o| to_dmatrix2(o.trace_second().matrix()))
                .map_err(|e| core_error(e, None))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut m: f64 = 0.0;
    for i in 0..outs.len() {
        for j in i + 1..outs.len() {
            m = m.max(2.0 * trace_distance(&outs[i], &outs[j]));
        }
    }
    Ok(m)
}
