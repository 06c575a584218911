//! One function per subcommand.

use std::path::PathBuf;

use serde::Serialize;

use crate::grid::GridValue;
use crate::manifest::{Manifest, ManifestError};
use crate::output::{num, Artifacts, Check, Header};
use crate::{Common, Failure};
use fbx::dimensions::{
    default_omega_grid, dq_empirical, equilibrium_from_zeros, spectrum_cylinder, spectrum_linear_exact,
};
use fbx::evolution::{truncated_rows, PropagationParams, Propagator};
use fbx::jacobi::{jacobi_from_discrete, jacobi_from_moments, JacobiMatrix};
use fbx::measures::{atomic_approximation, cylinders, exact_moments_with_precision, MeasureSpec, DEFAULT_MOMENT_BITS};
use fbx::scaling::{
    barrier_experiment, class_member, d2_decay_check, equivalence_class_experiment, fit_beta, fit_ketzmerick_gamma,
    fit_wavefront, reference_dimension, run_sweep, three_map_counterexample, verify_julia_relation, Averaging,
    BetaCurve, FitWindow, Operator, SweepOptions, DEFAULT_FRONT_EPSILON, REFERENCE_LEVELS,
};

type Run = Result<(), Failure>;

const DEFAULT_T_GRID: &str = "10:*1.7782794100389228:10000";
const DEFAULT_ALPHAS: &str = "0.5,1,2";
const DEFAULT_Q: &str = "-2:0.25:3";
const DEFAULT_OMEGA: &str = "0.0001:*1.7782794100389228:0.1";
const DEFAULT_N_GRID: &str = "1:*2:1024";

/// `D_0` of the two-fifths class used by the class and three-map experiments.
fn class_d0() -> f64 {
    2f64.ln() / (5f64.ln() - 2f64.ln())
}

fn text(v: &Option<String>) -> Option<GridValue> {
    v.as_ref().map(|s| GridValue::Text(s.clone()))
}

fn apply_overrides(m: &mut Manifest, c: &Common) -> Result<(), ManifestError> {
    let pairs = [
        (&mut m.q, &c.q),
        (&mut m.t, &c.t),
        (&mut m.t_grid, &c.t_grid),
        (&mut m.alphas, &c.alphas),
        (&mut m.omega_grid, &c.omega_grid),
        (&mut m.n_grid, &c.n_grid),
    ];
    for (slot, flag) in pairs {
        if flag.is_some() {
            *slot = text(flag);
        }
    }
    if let Some(n) = c.n {
        m.n = Some(n);
    }
    if let Some(l) = &c.levels {
        let parsed: Result<Vec<usize>, _> = l.split(':').map(|s| s.trim().parse::<usize>()).collect();
        m.levels = Some(parsed.map_err(|_| ManifestError(format!("levels: cannot read {l:?}")))?);
    }
    if let Some(e) = c.epsilon {
        m.epsilon = Some(e);
    }
    if let Some(a) = &c.averaging {
        let v = serde_json::Value::String(a.clone());
        m.averaging = Some(serde_json::from_value(v).map_err(|_| ManifestError(format!("averaging: unknown {a:?}")))?);
    }
    if let Some(p) = c.precision {
        m.precision = Some(p);
    }
    if let Some(out) = &c.out {
        m.out = Some(out.display().to_string());
    }
    Ok(())
}

struct Ctx {
    m: Manifest,
    spec: Option<MeasureSpec>,
    art: Artifacts,
}

impl Ctx {
    fn spec(&self) -> Result<&MeasureSpec, Failure> {
        self.spec.as_ref().ok_or_else(|| ManifestError("manifest has no measure".into()).into())
    }

    fn operator(&self) -> Result<Operator, Failure> {
        match (&self.spec, &self.m.barrier) {
            (Some(s), _) => Ok(Operator::Measure(s.clone())),
            (None, Some(b)) => Ok(Operator::Barrier(b.clone().validate()?)),
            (None, None) => Err(ManifestError("manifest needs a measure or a barrier".into()).into()),
        }
    }

    fn grid(&self, name: &str, value: &Option<GridValue>, default: &str) -> Result<Vec<f64>, ManifestError> {
        self.m.grid(name, value, Some(default))
    }

    fn t_grid(&self) -> Result<Vec<f64>, ManifestError> {
        self.grid("t_grid", &self.m.t_grid, DEFAULT_T_GRID)
    }

    fn alphas(&self) -> Result<Vec<f64>, ManifestError> {
        self.grid("alphas", &self.m.alphas, DEFAULT_ALPHAS)
    }

    fn counts(&self, name: &str, value: &Option<GridValue>, default: &str) -> Result<Vec<usize>, ManifestError> {
        let raw = self.grid(name, value, default)?;
        if raw.iter().any(|&v| !(v >= 0.0)) {
            return Err(ManifestError(format!("{name}: counts must be non-negative")));
        }
        let mut n: Vec<usize> = raw.iter().map(|v| v.round() as usize).collect();
        n.dedup();
        Ok(n)
    }

    fn levels(&self) -> Result<(usize, usize), ManifestError> {
        match self.m.levels.as_deref() {
            None => Ok(REFERENCE_LEVELS),
            Some([k]) => Ok((*k, *k)),
            Some([a, b]) if a <= b => Ok((*a, *b)),
            Some(other) => Err(ManifestError(format!("levels: expected [k_min, k_max], got {other:?}"))),
        }
    }

    fn averaging(&self) -> Averaging {
        self.m.averaging.unwrap_or(Averaging::Gaussian)
    }

    fn opts(&self) -> SweepOptions {
        let mut o = SweepOptions::default();
        if let Some(t) = &self.m.tolerances {
            if let Some(v) = t.tail_tol {
                o.params.tail_tol = v;
            }
            if let Some(g) = t.guard {
                o.params.guard = g;
            }
        }
        if let Some(d) = self.m.density {
            o.density = d;
        }
        o
    }

    fn tolerance(&self, pick: impl Fn(&crate::manifest::Tolerances) -> Option<f64>, default: f64) -> f64 {
        self.m.tolerances.as_ref().and_then(pick).unwrap_or(default)
    }
}

pub fn run(command: &str, c: Common) -> Run {
    if c.threads > 0 {
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(c.threads).build_global();
    }
    let mut m = match &c.manifest {
        Some(p) => Manifest::load(p)?,
        None => Manifest::default(),
    };
    apply_overrides(&mut m, &c)?;
    let spec = m.measure()?;
    if let Some(b) = &m.barrier {
        b.clone().validate()?;
    }
    let measure = match (&spec, &m.barrier) {
        (Some(s), _) => s.to_json_value(),
        (None, Some(b)) => serde_json::json!({ "variant": "barrier", "spec": b }),
        (None, None) => serde_json::Value::Null,
    };
    let header = Header {
        tool: "fbx",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        manifest_sha256: m.hash(),
        measure,
    };
    let out = PathBuf::from(m.out.clone().unwrap_or_else(|| ".".into()));
    let art = Artifacts::new(&out, header)?;
    let mut ctx = Ctx { m, spec, art };
    let result = match command {
        "measure-info" => measure_info(&mut ctx),
        "jacobi" => jacobi(&mut ctx),
        "evolve" => evolve(&mut ctx),
        "moments" => moments(&mut ctx),
        "dims" => dims(&mut ctx),
        "fit-beta" => fit_beta_cmd(&mut ctx),
        "fit-gamma" => fit_gamma(&mut ctx),
        "fit-front" => fit_front(&mut ctx),
        "exp-julia" => exp_julia(&mut ctx),
        "exp-class" => exp_class(&mut ctx),
        "exp-threemap" => exp_threemap(&mut ctx),
        "exp-barrier" => exp_barrier(&mut ctx),
        "exp-d2decay" => exp_d2decay(&mut ctx),
        other => unreachable!("unhandled subcommand {other}"),
    };
    if let Err(f) = &result {
        ctx.art.abandon(&format!("{f:?}"));
    }
    result
}

fn measure_info(ctx: &mut Ctx) -> Run {
    let spec = ctx.spec()?.clone();
    let level = ctx.m.level.unwrap_or(8);
    ctx.art.begin("cylinders.csv")?;
    #[derive(Serialize)]
    struct Info {
        hull: (f64, f64),
        maps: usize,
        probs: Vec<f64>,
        symmetric: bool,
        disjoint_cylinders: bool,
        d0: Option<f64>,
        d1: Option<f64>,
        d2: Option<f64>,
    }
    let dim = |q| reference_dimension(&spec, q).ok();
    let info = Info {
        hull: spec.hull(),
        maps: spec.map_count(),
        probs: (0..spec.map_count()).map(|i| spec.map_prob(i)).collect(),
        symmetric: spec.is_symmetric_about_zero(),
        disjoint_cylinders: spec.has_disjoint_cylinders(),
        d0: dim(0.0),
        d1: dim(1.0),
        d2: dim(2.0),
    };
    let cover = cylinders(&spec, level)?;
    let mut cells = cover.cells.clone();
    cells.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut cumulative = 0.0;
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            cumulative += c.weight;
            vec![num(c.lo), num(c.hi), num(c.weight), num(cumulative)]
        })
        .collect();
    ctx.art.csv("cylinders.csv", &["lo", "hi", "weight", "distribution"], &rows)?;
    ctx.art.json("measure_info.json", info, None)?;
    Ok(())
}

fn jacobi(ctx: &mut Ctx) -> Run {
    let n = ctx.m.n.unwrap_or(64);
    if n == 0 {
        return Err(ManifestError("n must be positive".into()).into());
    }
    ctx.art.begin("jacobi.csv")?;
    let route = ctx.m.route.clone().unwrap_or_else(|| "auto".into());
    let j: JacobiMatrix = match route.as_str() {
        "auto" => ctx.operator()?.build(n)?,
        "moments" => {
            let spec = ctx.spec()?;
            let bits = ctx.m.precision.unwrap_or(DEFAULT_MOMENT_BITS);
            jacobi_from_moments(&exact_moments_with_precision(spec, 2 * n - 1, bits), n, spec.hull())?
        }
        "discrete" => {
            let spec = ctx.spec()?;
            jacobi_from_discrete(&atomic_approximation(spec, ctx.m.level.unwrap_or(12))?, n)?
        }
        other => return Err(ManifestError(format!("route: unknown {other:?}")).into()),
    };
    let rows: Vec<Vec<String>> = (0..j.len())
        .map(|k| vec![k.to_string(), num(j.diag[k]), j.offdiag.get(k).map_or(String::new(), |&b| num(b))])
        .collect();
    ctx.art.csv("jacobi.csv", &["n", "a", "b"], &rows)?;
    ctx.art.json("jacobi.json", serde_json::json!({ "size": j.len(), "route": j.route.to_string(), "hull": j.hull }), None)?;
    Ok(())
}

fn evolve(ctx: &mut Ctx) -> Run {
    let times = ctx.grid("t", &ctx.m.t, "0:1:50")?;
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0)) {
        return Err(fbx::Error::TimeNegative(t).into());
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ManifestError("t: times must increase".into()).into());
    }
    let n_out = ctx.m.n.unwrap_or(32);
    ctx.art.begin("evolve.csv")?;
    let op = ctx.operator()?;
    let opts = ctx.opts();
    let params = PropagationParams { ..opts.params };
    let t_max = times.last().copied().unwrap_or(0.0);
    let j = op.build(op.rule_size(t_max)?.max(n_out))?;
    let mut prop = Propagator::from_ground(&j, j.len(), params)?;
    let mut rows = Vec::new();
    let mut norms = Vec::new();
    for &t in &times {
        prop.advance(t - prop.time())?;
        let state = prop.state();
        norms.push(state.iter().map(|a| a.norm_sqr()).sum::<f64>());
        for (n, a) in state.iter().enumerate().take(n_out) {
            rows.push(vec![num(t), n.to_string(), num(a.re), num(a.im), num(a.norm_sqr())]);
        }
    }
    if prop.max_tail() > params.tail_tol {
        return Err(fbx::Error::TruncationTooSmall(prop.max_tail()).into());
    }
    ctx.art.csv("evolve.csv", &["t", "n", "re", "im", "prob"], &rows)?;
    let defect = norms.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let checks = [Check::at_most("unitarity_defect", defect, 1e-8)];
    let result = serde_json::json!({ "times": times, "norms": norms, "truncation": j.len(), "max_tail": prop.max_tail() });
    ctx.art.json("evolve.json", result, Some(&checks))?;
    Ok(())
}

fn moments(ctx: &mut Ctx) -> Run {
    let alphas = ctx.alphas()?;
    let op = ctx.operator()?;
    let opts = ctx.opts();
    if ctx.m.omega_grid.is_some() || ctx.m.n_grid.is_some() {
        let omegas = ctx.grid("omega_grid", &ctx.m.omega_grid, DEFAULT_OMEGA)?;
        let n_list = ctx.counts("n_grid", &ctx.m.n_grid, DEFAULT_N_GRID)?;
        if omegas.iter().any(|&w| !(w > 0.0)) {
            return Err(ManifestError("omega_grid must be positive".into()).into());
        }
        ctx.art.begin("truncated.csv")?;
        let mut targets: Vec<f64> = omegas.iter().map(|w| 1.0 / w).collect();
        targets.sort_by(f64::total_cmp);
        let sweep = run_sweep(&op, &targets, &opts)?;
        let rows: Vec<Vec<String>> = truncated_rows(&sweep, &alphas, &n_list)
            .iter()
            .map(|r| vec![num(r.omega), r.n.to_string(), num(r.alpha), num(r.averaged), num(r.instantaneous)])
            .collect();
        ctx.art.csv("truncated.csv", &["omega", "N", "alpha", "averaged", "instantaneous"], &rows)?;
        let summary = serde_json::json!({ "truncation": sweep.truncation, "max_tail": sweep.max_tail });
        ctx.art.json("truncated.json", summary, None)?;
        return Ok(());
    }
    let targets = ctx.t_grid()?;
    if targets.iter().any(|&t| !(t > 0.0)) || targets.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ManifestError("t_grid must be positive and increasing".into()).into());
    }
    ctx.art.begin("moments.csv")?;
    let sweep = run_sweep(&op, &targets, &opts)?;
    let mut rows = Vec::new();
    for (k, &t) in targets.iter().enumerate() {
        for &a in &alphas {
            rows.push(vec![num(t), num(a), num(sweep.averaged_moment(k, a)), num(sweep.instantaneous_moment(k, a))]);
        }
    }
    ctx.art.csv("moments.csv", &["t", "alpha", "averaged", "instantaneous"], &rows)?;
    ctx.art.json("moments.json", serde_json::json!({ "truncation": sweep.truncation, "max_tail": sweep.max_tail }), None)?;
    Ok(())
}

fn dims(ctx: &mut Ctx) -> Run {
    let q_grid = ctx.grid("q", &ctx.m.q, DEFAULT_Q)?;
    let spec = ctx.spec()?.clone();
    ctx.art.begin("dims.csv")?;
    let (method, d, residual): (&str, Vec<f64>, Vec<f64>) = if let Some(n) = ctx.m.equilibrium {
        let j = ctx.operator()?.build(n + 1)?;
        let m = equilibrium_from_zeros(&j, n)?;
        let grid = default_omega_grid(&m, 2.5, 8);
        let mut d = Vec::new();
        let mut res = Vec::new();
        for &q in &q_grid {
            let e = dq_empirical(&m, q, &grid)?;
            d.push(e.value);
            res.push(e.fit.rms);
        }
        let mut cumulative = 0.0;
        let rows: Vec<Vec<String>> = m
            .points()
            .iter()
            .zip(m.weights())
            .map(|(x, w)| {
                cumulative += w;
                vec![num(*x), num(cumulative)]
            })
            .collect();
        ctx.art.csv("equilibrium.csv", &["s", "distribution"], &rows)?;
        ("empirical", d, res)
    } else {
        match &spec {
            MeasureSpec::LinearIfs(ifs) if ifs.is_disconnected() => {
                let s = spectrum_linear_exact(ifs, &q_grid)?;
                ("exact_ifs", s.d, s.residual)
            }
            MeasureSpec::Arcsine => {
                let d = q_grid.iter().map(|&q| reference_dimension(&spec, q)).collect::<Result<Vec<_>, _>>()?;
                ("closed_form", d, vec![0.0; q_grid.len()])
            }
            _ => {
                let (k0, k1) = ctx.levels()?;
                let s = spectrum_cylinder(&spec, &q_grid, k0, k1)?;
                ("cylinder", s.d, s.residual)
            }
        }
    };
    let rows: Vec<Vec<String>> = q_grid
        .iter()
        .zip(&d)
        .zip(&residual)
        .map(|((q, d), r)| vec![num(*q), num(*d), num(*r), method.to_string()])
        .collect();
    ctx.art.csv("dims.csv", &["q", "D_q", "residual", "method"], &rows)?;
    Ok(())
}

fn beta_rows(curve: &BetaCurve, label: &str) -> Vec<Vec<String>> {
    curve
        .alphas
        .iter()
        .zip(&curve.fits)
        .map(|(a, f)| {
            vec![
                label.to_string(),
                num(*a),
                num(f.exponent),
                num(f.slope_inf),
                num(f.slope_sup),
                num(f.ci()),
                num(f.window.0),
                num(f.window.1),
            ]
        })
        .collect()
}

const BETA_COLUMNS: [&str; 8] = ["curve", "alpha", "beta", "slope_inf", "slope_sup", "ci", "log10_t_lo", "log10_t_hi"];

fn fit_beta_cmd(ctx: &mut Ctx) -> Run {
    let (alphas, t_grid) = (ctx.alphas()?, ctx.t_grid()?);
    ctx.art.begin("beta.csv")?;
    let curve = fit_beta(&ctx.operator()?, &alphas, &t_grid, ctx.averaging(), &FitWindow::default(), &ctx.opts())?;
    ctx.art.csv("beta.csv", &BETA_COLUMNS, &beta_rows(&curve, "operator"))?;
    let mut rows = Vec::new();
    for (i, &a) in curve.alphas.iter().enumerate() {
        for (t, nu) in curve.times.iter().zip(&curve.moments[i]) {
            rows.push(vec![num(*t), num(a), num(*nu)]);
        }
    }
    ctx.art.csv("beta_moments.csv", &["t", "alpha", "nu"], &rows)?;
    ctx.art.json("beta.json", &curve, None)?;
    Ok(())
}

fn fit_gamma(ctx: &mut Ctx) -> Run {
    let omegas = ctx.grid("omega_grid", &ctx.m.omega_grid, DEFAULT_OMEGA)?;
    let n_list = ctx.counts("n_grid", &ctx.m.n_grid, DEFAULT_N_GRID)?;
    let spec = ctx.spec()?.clone();
    ctx.art.begin("gamma_surface.csv")?;
    let d2 = reference_dimension(&spec, 2.0)?;
    let fit = fit_ketzmerick_gamma(&Operator::Measure(spec), d2, &omegas, &n_list, &ctx.opts())?;
    let rows: Vec<Vec<String>> = fit
        .surface
        .iter()
        .map(|p| vec![num(p.omega), p.n.to_string(), num(p.nu0), num(p.compensated), p.in_mask.to_string()])
        .collect();
    ctx.art.csv("gamma_surface.csv", &["omega", "N", "nu0", "compensated", "in_mask"], &rows)?;
    let checks = [
        Check::at_most("gamma_minus_one", (fit.gamma - 1.0).abs(), ctx.tolerance(|t| t.gap, 0.1)),
        Check::at_most("compensated_variation", fit.variation, ctx.tolerance(|t| t.variation, 0.2)),
    ];
    #[derive(Serialize)]
    struct Gamma {
        gamma: f64,
        omega_exponent: f64,
        d2: f64,
        residual: f64,
        points: usize,
        variation: f64,
    }
    let g = Gamma {
        gamma: fit.gamma,
        omega_exponent: fit.omega_exponent,
        d2: fit.d2,
        residual: fit.residual,
        points: fit.points,
        variation: fit.variation,
    };
    ctx.art.json("gamma.json", g, Some(&checks))?;
    Ok(())
}

fn fit_front(ctx: &mut Ctx) -> Run {
    let t_grid = ctx.t_grid()?;
    let eps = ctx.m.epsilon.unwrap_or(DEFAULT_FRONT_EPSILON);
    ctx.art.begin("front.csv")?;
    let w = fit_wavefront(&ctx.operator()?, &t_grid, eps, &FitWindow::default(), &ctx.opts())?;
    let rows: Vec<Vec<String>> =
        w.trace.times.iter().zip(&w.trace.fronts).map(|(t, f)| vec![num(*t), f.to_string()]).collect();
    ctx.art.csv("front.csv", &["t", "front"], &rows)?;
    ctx.art.json("front.json", &w, None)?;
    Ok(())
}

fn exp_julia(ctx: &mut Ctx) -> Run {
    let lambda = match ctx.spec()? {
        MeasureSpec::Julia(j) => j.lambda(),
        _ => return Err(fbx::Error::InvalidArgument("exp-julia needs a julia measure".into()).into()),
    };
    let (alphas, t_grid) = (ctx.alphas()?, ctx.t_grid()?);
    ctx.art.begin("julia.csv")?;
    let rows = verify_julia_relation(lambda, &alphas, &t_grid, ctx.averaging(), &FitWindow::default(), &ctx.opts())?;
    let tol = ctx.tolerance(|t| t.gap, 0.05);
    let checks: Vec<Check> = rows.iter().map(|r| Check::at_most(format!("gap_alpha_{}", r.alpha), r.gap.abs(), tol)).collect();
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.alpha), num(r.beta), num(r.beta_ci), num(r.dimension), num(r.gap), num(r.ci)])
        .collect();
    ctx.art.csv("julia.csv", &["alpha", "beta", "beta_ci", "D_1_minus_alpha", "gap", "ci"], &csv)?;
    ctx.art.json("julia.json", &rows, Some(&checks))?;
    Ok(())
}

fn exp_class(ctx: &mut Ctx) -> Run {
    let d0 = ctx.m.d0.unwrap_or_else(class_d0);
    let members = match (&ctx.m.members, &ctx.m.delta1) {
        (Some(ms), _) => ms
            .iter()
            .map(|v| match MeasureSpec::from_json_value(v)? {
                MeasureSpec::LinearIfs(ifs) => Ok(ifs),
                _ => Err(fbx::Error::InvalidArgument("class members must be linear IFS".into())),
            })
            .collect::<Result<Vec<_>, _>>()?,
        (None, d1) => {
            let d1 = d1.clone().unwrap_or_else(|| vec![0.4, 0.3, 0.2]);
            d1.iter().map(|&d| class_member(d0, d)).collect::<Result<Vec<_>, _>>()?
        }
    };
    let (alphas, t_grid) = (ctx.alphas()?, ctx.t_grid()?);
    ctx.art.begin("class_beta.csv")?;
    let r = equivalence_class_experiment(d0, &members, &alphas, &t_grid, ctx.averaging(), &FitWindow::default(), &ctx.opts())?;
    let rows: Vec<Vec<String>> = r.curves.iter().enumerate().flat_map(|(i, c)| beta_rows(c, &format!("member_{i}"))).collect();
    ctx.art.csv("class_beta.csv", &BETA_COLUMNS, &rows)?;
    let checks = [Check::at_most("max_pairwise_deviation", r.max_deviation, ctx.tolerance(|t| t.gap, 0.03))];
    let members: Vec<serde_json::Value> =
        members.iter().map(|m| MeasureSpec::LinearIfs(m.clone()).to_json_value()).collect();
    let result = serde_json::json!({ "d0": r.d0, "members": members, "deviation": r.deviation, "max_deviation": r.max_deviation });
    ctx.art.json("class.json", result, Some(&checks))?;
    Ok(())
}

fn exp_threemap(ctx: &mut Ctx) -> Run {
    let delta = ctx.m.delta.unwrap_or_else(|| 3f64.powf(-1.0 / class_d0()));
    let offsets = ctx.m.offsets.clone().unwrap_or_else(|| vec![0.0, 0.25]);
    let (alphas, t_grid) = (ctx.alphas()?, ctx.t_grid()?);
    ctx.art.begin("threemap_beta.csv")?;
    let r = three_map_counterexample(delta, &offsets, &alphas, &t_grid, ctx.averaging(), &FitWindow::default(), &ctx.opts())?;
    let rows: Vec<Vec<String>> =
        r.curves.iter().zip(&r.offsets).flat_map(|(c, o)| beta_rows(c, &format!("offset_{o}"))).collect();
    ctx.art.csv("threemap_beta.csv", &BETA_COLUMNS, &rows)?;
    let best = r.separation.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let checks = [
        Check { name: "separation_beyond_ci".into(), value: best, tolerance: 0.0, pass: r.separated },
        Check { name: "spectra_equal".into(), value: 0.0, tolerance: 1e-12, pass: r.spectra_equal },
    ];
    let result = serde_json::json!({ "delta": r.delta, "offsets": r.offsets, "separation": r.separation });
    ctx.art.json("threemap.json", result, Some(&checks))?;
    Ok(())
}

fn exp_barrier(ctx: &mut Ctx) -> Run {
    let spec = ctx.m.barrier.clone().ok_or_else(|| ManifestError("exp-barrier needs a barrier".into()))?;
    let (alphas, t_grid) = (ctx.alphas()?, ctx.t_grid()?);
    ctx.art.begin("barrier.csv")?;
    let r = barrier_experiment(&spec, &alphas, &t_grid, ctx.averaging(), &FitWindow::default(), &ctx.opts())?;
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|b| {
            let flags = [b.below_bound.to_string(), b.ballistic_sup.to_string()];
            let mut row = vec![num(b.alpha), num(b.beta), num(b.slope_inf), num(b.slope_sup), num(b.ci), num(b.bound)];
            row.extend(flags);
            row
        })
        .collect();
    let cols = ["alpha", "beta", "slope_inf", "slope_sup", "ci", "bound", "below_bound", "ballistic_sup"];
    ctx.art.csv("barrier.csv", &cols, &rows)?;
    ctx.art.json("barrier.json", &r.rows, None)?;
    Ok(())
}

fn exp_d2decay(ctx: &mut Ctx) -> Run {
    let t_grid = ctx.t_grid()?;
    let spec = ctx.spec()?.clone();
    ctx.art.begin("d2decay.csv")?;
    let d2 = reference_dimension(&spec, 2.0)?;
    let r = d2_decay_check(&Operator::Measure(spec), d2, &t_grid, &FitWindow::default(), &ctx.opts())?;
    let rows: Vec<Vec<String>> = r.times.iter().zip(&r.averaged_return).map(|(t, a)| vec![num(*t), num(*a)]).collect();
    ctx.art.csv("d2decay.csv", &["t", "averaged_return"], &rows)?;
    let checks = [Check::at_most("decay_gap", r.gap.abs(), ctx.tolerance(|t| t.gap, 0.1))];
    let result = serde_json::json!({ "slope": r.fit.exponent, "d2": r.d2, "gap": r.gap, "fit": r.fit });
    ctx.art.json("d2decay.json", result, Some(&checks))?;
    Ok(())
}
