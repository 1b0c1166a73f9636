//! One function per subcommand. Each writes its tables and then reports any
//! violated numerical contract as an error.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use num_complex::Complex64;
use udwq_core::channel::{
    assemble_rho_eb, bloch_grid, channel_coherent_information, negativity, spacelike_rho_eb, ProtocolSpec,
    QubitState, TwoQubitState,
};
use udwq_core::field::{table_from_amplitudes, SpatialProfile};
use udwq_core::fock::{oracle_bilinears, simulate_protocol, DiscreteModeModel, Ordering, TruncatedFock};
use udwq_core::protocol::{causal_classify, CausalClass, Support};
use udwq_core::weyl::BASIS_LABELS;

use crate::config::{core_error, with_parameter, BobConfig, ExperimentConfig, Source};
use crate::error::{CliError, CliResult};
use crate::experiment::{
    describe_grid, grid_of, input_dependence, metrics, model_of, output_state, random_inputs, resolve, shared_grid,
    Resolved,
};
use crate::output::{num, Run, Table};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub src: Source,
    pub dir: std::path::PathBuf,
}

impl Context {
    fn run<'a>(&'a self, command: &'a str, grid: Option<String>) -> Run<'a> {
        Run {
            command,
            config: &self.cfg,
            grid,
            dir: self.dir.clone(),
            prefix: self.cfg.output.prefix.clone().unwrap_or_default(),
        }
    }

    fn seed(&self) -> u64 {
        self.cfg.seed.unwrap_or(0)
    }

    fn resolve_base(&self) -> CliResult<Resolved> {
        let model = model_of(&self.cfg, &self.src)?;
        let grid = Arc::new(grid_of(&self.cfg, &model, &self.src)?);
        resolve(&self.cfg, grid, &self.src)
    }
}

fn quantity_table(rows: &[(&str, String)]) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    for (q, v) in rows {
        t.push(vec![q.to_string(), v.clone()]);
    }
    t
}

fn flag(b: bool) -> String {
    if b { "1".into() } else { "0".into() }
}

fn warn_margin(r: &Resolved, margin: f64, threshold: f64) -> bool {
    let low = margin < threshold;
    if low {
        log::warn!("strong-coupling margin {margin:.3e} is below the threshold {threshold} (c = {:.6e})", r.c);
    }
    low
}

pub fn bilinears(ctx: &Context) -> CliResult<()> {
    let r = ctx.resolve_base()?;
    let mut t = Table::new(&["matrix", "row", BASIS_LABELS[0], BASIS_LABELS[1], BASIS_LABELS[2], BASIS_LABELS[3]]);
    for (name, m) in [("E", r.table.e()), ("H", r.table.h())] {
        for i in 0..4 {
            let mut row = vec![name.to_string(), BASIS_LABELS[i].to_string()];
            row.extend((0..4).map(|j| num(m[(i, j)])));
            t.push(row);
        }
    }
    ctx.run("bilinears", Some(describe_grid(&r.grid))).write("bilinears", &t)?;
    Ok(())
}

pub fn channel(ctx: &Context) -> CliResult<()> {
    let r = ctx.resolve_base()?;
    let rho = output_state(&r.table)?;
    let m = metrics(&r)?;
    let low = warn_margin(&r, m.margin, ctx.cfg.alice.margin_threshold);
    let mut t = Table::new(&["row", "col", "re", "im"]);
    for i in 0..4 {
        for j in 0..4 {
            let z = rho.matrix()[(i, j)];
            t.push(vec![i.to_string(), j.to_string(), num(z.re), num(z.im)]);
        }
    }
    let run = ctx.run("channel", Some(describe_grid(&r.grid)));
    run.write("channel_rho", &t)?;
    let summary = quantity_table(&[
        ("lambda2", num(r.lambda2)),
        ("c", num(r.c)),
        ("branch", r.cond.branch.to_string()),
        ("fine_tuned", flag(r.fine_tuned)),
        ("E12", num(m.e12)),
        ("margin", num(m.margin)),
        ("margin_below_threshold", flag(low)),
        ("I_c", num(m.coherent_info)),
        ("I_c_channel_max", num(m.channel_coherent_info)),
        ("negativity", num(m.negativity)),
        ("signaling", num(m.signaling)),
    ]);
    run.write("channel", &summary)?;
    Ok(())
}

pub fn sweep(ctx: &Context) -> CliResult<()> {
    let s = ctx
        .cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ctx.src.error("sweep", "the sweep subcommand needs a sweep block"))?;
    let model = model_of(&ctx.cfg, &ctx.src)?;
    let cfgs: Vec<ExperimentConfig> = s.values.iter().map(|&v| with_parameter(&ctx.cfg, s.parameter, v)).collect();
    let grid = Arc::new(shared_grid(&cfgs, &model, &ctx.src)?);
    let results: Vec<CliResult<(Resolved, crate::experiment::Metrics)>> = cfgs
        .par_iter()
        .map(|c| {
            let r = resolve(c, grid.clone(), &ctx.src)?;
            let m = metrics(&r)?;
            Ok((r, m))
        })
        .collect();
    let mut t = Table::new(&[s.parameter.name(), "E12", "margin", "I_c", "negativity", "signaling", "margin_below_threshold", "lambda2", "c"]);
    for (v, res) in s.values.iter().zip(results) {
        let (r, m) = res?;
        let low = warn_margin(&r, m.margin, ctx.cfg.alice.margin_threshold);
        t.push(vec![
            num(*v),
            num(m.e12),
            num(m.margin),
            num(m.coherent_info),
            num(m.negativity),
            num(m.signaling),
            flag(low),
            num(r.lambda2),
            num(r.c),
        ]);
    }
    ctx.run("sweep", Some(describe_grid(&grid))).write("sweep", &t)?;
    Ok(())
}

fn supports(cfg: &ExperimentConfig) -> Option<(Support, Support)> {
    let [p1, _] = cfg.alice.profiles();
    let alice = Support::new(p1.center().to_vec(), p1.support_radius(), cfg.alice.time);
    let bob = match &cfg.bob {
        BobConfig::Offset { offset, time } => {
            let p = p1.translated(offset);
            Support::new(p.center().to_vec(), p.support_radius(), time.unwrap_or(cfg.alice.time))
        }
        BobConfig::Explicit { g1, .. } => Support::new(g1.profile.center().to_vec(), g1.profile.support_radius(), g1.time),
        _ => return None,
    };
    Some((alice, bob))
}

fn check(failures: &mut Vec<String>, name: &str, value: f64, bound: f64) {
    if !(value <= bound) {
        failures.push(format!("{name} = {value:e} exceeds {bound:e}"));
    }
}

fn fail_on(invariant: &str, failures: Vec<String>) -> CliResult<()> {
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::contract(invariant, failures.join("; ")))
    }
}

pub fn spacelike(ctx: &Context) -> CliResult<()> {
    let (alice, bob) = supports(&ctx.cfg).ok_or_else(|| ctx.src.error("bob", "spacelike runs need bob mode offset or explicit"))?;
    let model = model_of(&ctx.cfg, &ctx.src)?;
    let class = causal_classify(&model, &alice, &bob).map_err(|e| ctx.src.core("model", e))?;
    if class.class != CausalClass::Spacelike {
        return Err(ctx.src.error("bob", format!("Bob's support is {:?}, not spacelike to Alice's", class.class)));
    }
    let r = ctx.resolve_base()?;
    let inputs = random_inputs(ctx.seed(), 10);
    let signaling = input_dependence(&r.table, &inputs)?;
    let rho = output_state(&r.table)?;
    let neg = negativity(&rho);
    let spec = ProtocolSpec::new(r.table.clone());
    let channel = |input: &TwoQubitState| assemble_rho_eb(&spec.with_input(input.clone()));
    let ic = channel_coherent_information(channel, &bloch_grid()).map_err(|e| core_error(e, None))?;
    let tol = 1e-12 * r.table.e()[(0, 1)].abs().max(1.0);
    let mut product_dev: f64 = 0.0;
    for input in &inputs {
        let s = spec.with_input(input.clone());
        let p = spacelike_rho_eb(&s, tol).map_err(|e| core_error(e, None))?;
        let a = assemble_rho_eb(&s).map_err(|e| core_error(e, None))?;
        product_dev = product_dev.max((p.matrix() - a.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let t = quantity_table(&[
        ("classification", format!("{:?}", class.class)),
        ("causal_margin", num(class.margin)),
        ("E12", num(r.table.e()[(0, 1)])),
        ("max_cross_E", num(r.table.max_cross_e())),
        ("signaling", num(signaling)),
        ("negativity", num(neg)),
        ("I_c_channel_max", num(ic.max)),
        ("product_form_deviation", num(product_dev)),
    ]);
    ctx.run("spacelike", Some(describe_grid(&r.grid))).write("spacelike", &t)?;
    let mut failures = Vec::new();
    check(&mut failures, "signaling", signaling, 1e-12);
    check(&mut failures, "negativity", neg, 1e-12);
    check(&mut failures, "I_c_channel_max", ic.max, 1e-12);
    check(&mut failures, "product_form_deviation", product_dev, 1e-12);
    fail_on("spacelike zero capacity", failures)
}

pub fn huygens(ctx: &Context) -> CliResult<()> {
    if ctx.cfg.model.dimension != 3 || ctx.cfg.model.mass != 0.0 {
        return Err(ctx.src.error("model", "the Huygens scenario needs a massless field in three spatial dimensions"));
    }
    let (alice, bob) = supports(&ctx.cfg).ok_or_else(|| ctx.src.error("bob", "huygens runs need bob mode offset or explicit"))?;
    let model = model_of(&ctx.cfg, &ctx.src)?;
    let class = causal_classify(&model, &alice, &bob).map_err(|e| ctx.src.core("model", e))?;
    if class.class != CausalClass::TimelikeInterior {
        return Err(ctx.src.error("bob", format!("Bob's support is {:?}, not inside Alice's lightcone", class.class)));
    }
    let r = ctx.resolve_base()?;
    let e12 = r.table.e()[(0, 1)].abs();
    let cross = r.table.max_cross_e();
    let ratio = if e12 > 0.0 { cross / e12 } else { f64::INFINITY };
    let dependence = input_dependence(&r.table, &random_inputs(ctx.seed(), 10))?;
    let t = quantity_table(&[
        ("classification", format!("{:?}", class.class)),
        ("causal_margin", num(class.margin)),
        ("E12", num(r.table.e()[(0, 1)])),
        ("max_cross_E", num(cross)),
        ("cross_ratio", num(ratio)),
        ("input_dependence", num(dependence)),
    ]);
    ctx.run("huygens", Some(describe_grid(&r.grid))).write("huygens", &t)?;
    let mut failures = Vec::new();
    check(&mut failures, "cross_ratio", ratio, 1e-8);
    check(&mut failures, "input_dependence", dependence, 1e-10);
    fail_on("strong Huygens", failures)
}

/// Random discrete model with per-mode reachable amplitude at most `cap`.
pub fn random_model(seed: u64, modes: usize, cap: f64) -> DiscreteModeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alpha: [Vec<Complex64>; 4] = Default::default();
    for a in alpha.iter_mut() {
        *a = (0..modes).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    }
    for m in 0..modes {
        let reach: f64 = alpha.iter().map(|a| a[m].norm()).sum();
        let target = cap * rng.gen_range(0.2..1.0);
        for a in alpha.iter_mut() {
            a[m] *= target / reach;
        }
    }
    DiscreteModeModel::new(alpha).expect("finite amplitudes")
}

pub fn oracle_check(ctx: &Context) -> CliResult<()> {
    let o = ctx.cfg.oracle.clone().unwrap_or_default();
    let fock = TruncatedFock::new(o.truncation);
    let seed = ctx.seed();
    let rows: Vec<CliResult<(usize, f64, f64)>> = (0..o.models)
        .into_par_iter()
        .map(|i| {
            let modes = 1 + i % o.max_modes;
            let model = random_model(seed.wrapping_add(i as u64), modes, o.max_amplitude);
            let lift = |e| core_error(e, None);
            let table = oracle_bilinears(&model).map_err(lift)?;
            let sim = simulate_protocol(&model, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, fock)
                .map_err(lift)?;
            let exact = assemble_rho_eb(&ProtocolSpec::new(table)).map_err(lift)?;
            let td = udwq_core::channel::trace_distance(
                &udwq_core::channel::to_dmatrix4(sim.matrix()),
                &udwq_core::channel::to_dmatrix4(exact.matrix()),
            );
            Ok((modes, model.reachable_amplitude(), td))
        })
        .collect();
    let mut t = Table::new(&["model", "modes", "reachable_amplitude", "trace_distance"]);
    let mut failures = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        let (modes, amp, td) = row?;
        check(&mut failures, &format!("model {i} trace distance"), td, o.tolerance);
        t.push(vec![i.to_string(), modes.to_string(), num(amp), num(td)]);
    }
    ctx.run("oracle-check", Some(format!("fock truncation={}", o.truncation))).write("oracle_check", &t)?;
    fail_on("Fock oracle equivalence", failures)
}

pub fn bob_solve(ctx: &Context) -> CliResult<()> {
    if !matches!(ctx.cfg.bob, BobConfig::Solve { .. }) {
        return Err(ctx.src.error("bob", "bob-solve needs bob mode solve"));
    }
    let r = ctx.resolve_base()?;
    let g = r.bob.as_ref().expect("solved smearings");
    let tabs: Vec<&udwq_core::field::TabulatedProfile> = g
        .iter()
        .flat_map(|s| s.terms.iter())
        .map(|term| match &term.profile {
            SpatialProfile::TabulatedFourier(t) => t,
            _ => unreachable!("decoding smearings are tabulated"),
        })
        .collect();
    let mut t = Table::new(&[
        "k", "g1_delta_re", "g1_delta_im", "g1_prime_re", "g1_prime_im", "g2_delta_re", "g2_delta_im", "g2_prime_re",
        "g2_prime_im",
    ]);
    for (i, &k) in tabs[0].nodes().iter().enumerate() {
        let mut row = vec![num(k)];
        for tab in &tabs {
            row.push(num(tab.values()[i].re));
            row.push(num(tab.values()[i].im));
        }
        t.push(row);
    }
    ctx.run("bob-solve", Some(describe_grid(&r.grid))).write("bob_solve", &t)?;
    let [a1, a2] = r.alice.clone();
    let ideal = table_from_amplitudes(&[a1.clone(), a2.clone(), a1, a2]).map_err(|e| core_error(e, None))?;
    let scale = ideal.h().amax().max(ideal.e().amax());
    let dev = (ideal.e() - r.table.e()).amax().max((ideal.h() - r.table.h()).amax());
    let mut failures = Vec::new();
    check(&mut failures, "bilinear deviation", dev, 1e-10 * scale.max(1.0));
    fail_on("decoding reproduces the g = f bilinears", failures)
}
