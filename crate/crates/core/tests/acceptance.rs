//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use isac_core::bf_design::{assemble_bf_sdp, recover_rank1, solve_bf_relaxation};
use isac_core::channel::ChannelSet;
use isac_core::linalg::{min_eigenvalue, trace_re, CMat, CVec, ZERO};
use isac_core::optimizer::{initialize_ris, run_scheme, Scheme};
use isac_core::ris_design::{assemble_ris_sdp, build_lifted, gaussian_randomization, lift};
use isac_core::rng::{complex_gaussian, complex_gaussian_mat, complex_gaussian_vec, random_hermitian, seeded, unit_phase};
use isac_core::sdp::{self, Constraint, ObjectiveSense, SdpProblem, SdpStatus, SolverOptions};
use isac_core::sim::{self, realization_channel, scheme_seed, solution_metrics, to_csv_string, Profile, SimulationConfig};
use isac_core::sysmodel::{
    min_user_sinr, ris_output_power, target_illumination, target_ris_noise, ris_power_bound, user_sinr,
    worst_case_illumination, BeamformerSet, DesignConfig, HybridRisSpec, RisState,
};
use isac_core::units::{linear_to_db, mw_to_dbm};
use num_complex::Complex64;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let pass = out.pass && took <= limit;
    println!(
        "{} criterion {id:>2} {name}: {} [{:.1}s / {:.0}s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        limit.as_secs_f64()
    );
    pass
}

fn desk_spec(l: usize) -> HybridRisSpec {
    HybridRisSpec {
        elements: 16,
        active: l,
        max_gain: 10f64.sqrt(),
        noise_power: 1e-6,
    }
}

fn desk_config() -> SimulationConfig {
    SimulationConfig::from_toml_str("", Profile::Desk).unwrap()
}

fn random_ris<R: Rng>(rng: &mut R, spec: &HybridRisSpec) -> RisState {
    RisState::new(CVec::from_fn(spec.elements, |i, _| {
        let r = if spec.is_active(i) { 1.0 + (spec.max_gain - 1.0) * rng.random::<f64>() } else { 1.0 };
        unit_phase(rng) * r
    }))
}

fn random_bf<R: Rng>(rng: &mut R, m: usize, k: usize, power: f64) -> BeamformerSet {
    let c = complex_gaussian_mat(rng, m, k);
    let s = complex_gaussian_mat(rng, m, m);
    let scale = Complex64::new((power / (c.norm_squared() + s.norm_squared())).sqrt(), 0.0);
    BeamformerSet {
        comm: c * scale,
        sensing: s * scale,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_1() -> Outcome {
    let mut worst_err: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut bad = 0;
    for i in 0..50u64 {
        let n = 1 + (i as usize % 12);
        let a = random_hermitian(&mut seeded(1000 + i), n);
        let mut p = SdpProblem::new(ObjectiveSense::Maximize);
        let x = p.add_block("X", n);
        p.set_objective_block(x, a.clone());
        p.add_constraint(Constraint::new("trace").block(x, CMat::identity(n, n)).eq(1.0));
        let sol = sdp::solve(&p, &SolverOptions::default()).unwrap();
        let lmax = isac_core::linalg::max_eigenvalue(&a);
        let err = (sol.objective - lmax).abs();
        let gap = (sol.objective - sol.dual_objective).abs().max(sol.duality_gap);
        worst_err = worst_err.max(err);
        worst_gap = worst_gap.max(gap);
        if sol.status != SdpStatus::Optimal || err > 1e-6 || gap > 1e-6 {
            bad += 1;
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!("50 problems, max |obj-λmax| {worst_err:.2e}, max gap {worst_gap:.2e}, {bad} outside tolerance"),
    }
}

fn desk_channel(seed: u64) -> ChannelSet {
    let cfg = desk_config();
    realization_channel(&SimulationConfig { seed, ..cfg }, 0).unwrap().1
}

fn criterion_2() -> Outcome {
    let spec = desk_spec(4);
    let (mut e_p, mut e_s) = (0.0f64, 0.0f64);
    for i in 0..200u64 {
        let ch = desk_channel(i);
        let mut rng = seeded(5000 + i);
        let ris = random_ris(&mut rng, &spec);
        let bf = random_bf(&mut rng, 8, 2, 8.0);
        let lm = build_lifted(&ch, &bf, &spec).unwrap();
        let v = lift(&ris);
        for m in 0..ch.targets() {
            let p = target_illumination(&ch, &ris, &bf, m).unwrap();
            e_p = e_p.max((p - isac_core::linalg::quad_form(&lm.t[m], &v)).abs() / (1.0 + p.abs()));
        }
        for k in 0..ch.users() {
            let g = user_sinr(&ch, &spec, &ris, &bf, k, 10f64.powf(-9.4)).unwrap();
            e_s = e_s.max((g - lm.sinr(&v, k, 10f64.powf(-9.4))).abs() / g.abs().max(1e-300));
        }
    }
    Outcome {
        pass: e_p <= 1e-8 && e_s <= 1e-8,
        detail: format!("200 triples, illumination err {e_p:.2e}, SINR rel err {e_s:.2e}"),
    }
}

fn criterion_3() -> Outcome {
    const DRAWS: usize = 100_000;
    let spec = desk_spec(4);
    let sigma: f64 = 1e-7;
    let mut worst: f64 = 0.0;
    for i in 0..10u64 {
        let ch = desk_channel(200 + i);
        let mut rng = seeded(7000 + i);
        let ris = random_ris(&mut rng, &spec);
        let bf = random_bf(&mut rng, 8, 2, 8.0);
        let n = spec.elements;
        let nu = spec.noise_power.sqrt();
        let diag_w = CMat::from_diagonal(&ris.coefficients);
        let h: Vec<CVec> = (0..2).map(|k| isac_core::sysmodel::effective_user_channel(&ch, &ris, k).unwrap()).collect();
        let g = isac_core::sysmodel::effective_target_channel(&ch, &ris, 0).unwrap();
        let rt_row = ch.g_rt[0].adjoint() * &diag_w;
        let ru_row = ch.h_ru[0].adjoint() * &diag_w;
        let (mut sig, mut rest, mut illum, mut tnoise, mut pris) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..DRAWS {
            let d = complex_gaussian_vec(&mut rng, 2);
            let t = complex_gaussian_vec(&mut rng, 8);
            let noise = CVec::from_fn(n, |i, _| if i < spec.active { complex_gaussian(&mut rng) * nu } else { ZERO });
            let x = &bf.comm * &d + &bf.sensing * &t;
            let useful = h[0].dotc(&bf.comm.column(0)) * d[0];
            let y = h[0].dotc(&x) + (&ru_row * &noise)[0] + complex_gaussian(&mut rng) * sigma.sqrt();
            sig += useful.norm_sqr();
            rest += (y - useful).norm_sqr();
            illum += g.dotc(&x).norm_sqr();
            tnoise += (&rt_row * &noise)[0].norm_sqr();
            let out = &diag_w * (&ch.h_br * &x + &noise);
            pris += out.rows(0, spec.active).norm_squared();
        }
        let k = DRAWS as f64;
        let pairs = [
            (sig / rest, user_sinr(&ch, &spec, &ris, &bf, 0, sigma).unwrap()),
            (illum / k, target_illumination(&ch, &ris, &bf, 0).unwrap()),
            (tnoise / k, target_ris_noise(&ch, &spec, &ris, 0).unwrap()),
            (pris / k, ris_output_power(&ch, &spec, &ris, &bf).unwrap()),
        ];
        for (est, exact) in pairs {
            worst = worst.max((est / exact - 1.0).abs());
        }
    }
    Outcome {
        pass: worst <= 0.02,
        detail: format!("10 instances x 4 metrics, max relative deviation {:.2}%", 100.0 * worst),
    }
}

fn criterion_4() -> Outcome {
    let cfg = desk_config();
    let (spec, design) = cfg.cell(0.0);
    let mut ok = 0;
    let mut total = 0;
    let mut margin = f64::INFINITY;
    for r in 0..100 {
        let (geometry, ch) = realization_channel(&cfg, r).unwrap();
        let ris = initialize_ris(&spec, scheme_seed(cfg.seed, r));
        let Ok(d) = isac_core::bf_design::design_beamformers(&ch, &spec, &ris, &design) else {
            continue;
        };
        total += 1;
        assert!(d.beamformers.total_power() <= design.total_power + 1e-6);
        let zeta = isac_core::channel::dfbs_ris_gain(&geometry, &cfg.fading).unwrap();
        let bound = ris_power_bound(&spec, zeta, design.total_power, cfg.fading.rician_factor, cfg.geometry.antennas);
        let p = ris_output_power(&ch, &spec, &ris, &d.beamformers).unwrap();
        margin = margin.min(mw_to_dbm(bound) - mw_to_dbm(p));
        if p <= bound {
            ok += 1;
        }
    }
    Outcome {
        pass: total == 100 && ok == total,
        detail: format!("{ok}/{total} designed realizations within bound, min margin {margin:.2} dB"),
    }
}

fn criterion_5() -> Outcome {
    let cfg = desk_config();
    let (spec, design) = cfg.cell(0.0);
    let (mut obj_err, mut eig_ok, mut sinr_ok, mut solved) = (0.0f64, true, true, 0);
    for r in 0..20 {
        let ch = realization_channel(&cfg, r).unwrap().1;
        let ris = initialize_ris(&spec, scheme_seed(cfg.seed, r));
        let bp = assemble_bf_sdp(&ch, &spec, &ris, &design).unwrap();
        let Ok(rel) = solve_bf_relaxation(&bp, &design) else { continue };
        solved += 1;
        let comm = recover_rank1(&rel.users, &bp.user_channels).unwrap();
        let residual = &rel.covariance - &comm * comm.adjoint();
        if min_eigenvalue(&residual) < -1e-8 * (1.0 + trace_re(&rel.covariance)) {
            eig_ok = false;
        }
        let sensing = isac_core::bf_design::recover_sensing(&rel.covariance, &comm).unwrap();
        let bf = BeamformerSet { comm, sensing };
        let (w, _) = worst_case_illumination(&ch, &ris, &bf).unwrap();
        obj_err = obj_err.max((w / rel.objective - 1.0).abs());
        if min_user_sinr(&ch, &spec, &ris, &bf, design.receiver_noise).unwrap() < design.sinr_threshold * (1.0 - 1e-4) {
            sinr_ok = false;
        }
    }
    Outcome {
        pass: solved == 20 && obj_err <= 1e-6 && eig_ok && sinr_ok,
        detail: format!("{solved}/20 solved, objective rel err {obj_err:.2e}, residual PSD {eig_ok}, SINR held {sinr_ok}"),
    }
}

fn tiny_instance(seed: u64) -> (ChannelSet, BeamformerSet) {
    let mut rng = seeded(seed);
    let (m, n) = (4, 3);
    let mut v = |len: usize| complex_gaussian_vec(&mut rng, len);
    let ch = ChannelSet {
        h_bu: vec![v(m)],
        h_ru: vec![v(n)],
        g_bt: vec![v(m), v(m)],
        g_rt: vec![v(n), v(n)],
        h_br: complex_gaussian_mat(&mut seeded(seed ^ 0xabc), n, m),
    };
    let bf = random_bf(&mut seeded(seed + 1), m, 1, 1.0);
    (ch, bf)
}

fn criterion_6() -> Outcome {
    let spec = HybridRisSpec {
        elements: 3,
        active: 0,
        max_gain: 1.0,
        noise_power: 1e-6,
    };
    let cfg = DesignConfig {
        sinr_threshold: 0.01,
        ..DesignConfig::default()
    };
    let steps = 100;
    let phases: Vec<Complex64> = (0..steps)
        .map(|i| Complex64::from_polar(1.0, std::f64::consts::PI / 50.0 * i as f64))
        .collect();
    let (mut worst_gap, mut bound_ok, mut solved) = (0.0f64, true, 0);
    for s in 0..20u64 {
        let (ch, bf) = tiny_instance(900 + s);
        let lm = build_lifted(&ch, &bf, &spec).unwrap();
        let mut grid = f64::NEG_INFINITY;
        for a in &phases {
            for b in &phases {
                for c in &phases {
                    let v = CVec::from_vec(vec![*a, *b, *c, Complex64::new(1.0, 0.0)]);
                    if lm.is_feasible(&v, &cfg, 1e-6) {
                        grid = grid.max(lm.worst_illumination(&v));
                    }
                }
            }
        }
        let rp = assemble_ris_sdp(&lm, &cfg, &spec, None).unwrap();
        let sol = sdp::solve(&rp.problem, &cfg.solver).unwrap();
        if sol.status != SdpStatus::Optimal || !grid.is_finite() {
            continue;
        }
        let relaxed = sol.scalars[0] * rp.objective_scale;
        let Ok(rand) = gaussian_randomization(&sol.blocks[0], &lm, &cfg, &spec, None, s) else {
            continue;
        };
        solved += 1;
        worst_gap = worst_gap.max((grid - rand.objective) / grid);
        if relaxed < grid * (1.0 - 1e-6) || relaxed < rand.objective * (1.0 - 1e-6) {
            bound_ok = false;
        }
    }
    Outcome {
        pass: solved == 20 && worst_gap <= 0.05 && bound_ok,
        detail: format!("{solved}/20 instances, worst shortfall vs grid {:.2}%, relaxation bounds both {bound_ok}", 100.0 * worst_gap),
    }
}

/// Final worst-case illumination (dBm) per realization, `None` if infeasible;
/// also checks the alternation guarantee on every trace.
fn desk_objectives(cfg: &SimulationConfig, value: f64, scheme: Scheme, guarantee: &mut Vec<String>) -> Vec<Option<f64>> {
    let (spec, design) = cfg.cell(value);
    (0..cfg.realizations)
        .map(|r| {
            let ch = realization_channel(cfg, r).unwrap().1;
            let trace = run_scheme(scheme, &ch, &design, &spec, scheme_seed(cfg.seed, r));
            if trace.records.windows(2).any(|w| w[1].best_so_far < w[0].best_so_far) {
                guarantee.push(format!("{scheme} r{r}: best-so-far decreased"));
            }
            let m = solution_metrics(&ch, &trace, &design).unwrap()?;
            if linear_to_db(m.min_sinr) < linear_to_db(design.sinr_threshold) - 0.01 {
                guarantee.push(format!("{scheme} r{r}: SINR {:.3} dB", linear_to_db(m.min_sinr)));
            }
            if mw_to_dbm(m.max_target_noise) > cfg.design.max_target_noise_dbm + 0.01 {
                guarantee.push(format!("{scheme} r{r}: target noise {:.3} dBm", mw_to_dbm(m.max_target_noise)));
            }
            Some(mw_to_dbm(m.worst_illumination))
        })
        .collect()
}

fn feasible_median(v: &[Option<f64>]) -> f64 {
    median(v.iter().flatten().copied().collect())
}

fn criterion_7(guarantee: &mut Vec<String>) -> Outcome {
    let cfg = desk_config();
    let h = desk_objectives(&cfg, 0.0, Scheme::Hybrid, guarantee);
    let p = desk_objectives(&cfg, 0.0, Scheme::PassiveRis, guarantee);
    let n = desk_objectives(&cfg, 0.0, Scheme::NoRis, guarantee);
    let (mh, mp, mn) = (feasible_median(&h), feasible_median(&p), feasible_median(&n));
    let paired: Vec<(f64, f64)> = h.iter().zip(&p).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    let wins = paired.iter().filter(|(a, b)| a >= b).count();
    let order = mh > mp && mp > mn;
    let margin = mh - mp >= 3.0;
    let share = wins as f64 >= 0.8 * paired.len() as f64 && !paired.is_empty();
    Outcome {
        pass: order && margin && share,
        detail: format!(
            "medians hybrid {mh:.3} / passive {mp:.3} / noris {mn:.3} dBm; strict order {order}; hybrid-passive {:.3} dB (need 3); hybrid>=passive {wins}/{}",
            mh - mp,
            paired.len()
        ),
    }
}

fn criterion_8(guarantee: &mut Vec<String>) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let cases: [(&str, Vec<f64>, bool); 3] = [
        ("eta", vec![0.0, 5.0, 10.0], true),
        ("L", vec![0.0, 4.0, 8.0], true),
        ("gamma", vec![0.0, 5.0, 10.0, 15.0], false),
    ];
    for (var, values, increasing) in cases {
        let cfg = desk_config().with_sweep(var.parse().unwrap()).unwrap();
        let cfg = SimulationConfig {
            sweep: sim::config::SweepConfig {
                variable: cfg.sweep.variable,
                values: values.clone(),
            },
            ..cfg
        };
        let mut med = Vec::new();
        let mut dropped = 0;
        for &v in &values {
            let o = desk_objectives(&cfg, v, Scheme::Hybrid, guarantee);
            dropped += o.iter().filter(|x| x.is_none()).count();
            med.push(feasible_median(&o));
        }
        let ok = med.windows(2).all(|w| if increasing { w[1] >= w[0] - 0.5 } else { w[1] <= w[0] + 0.5 });
        pass &= ok;
        lines.push(format!(
            "{var} [{}] {} ({dropped} infeasible excluded)",
            med.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(", "),
            if ok { "ok" } else { "violated" }
        ));
    }
    Outcome {
        pass,
        detail: lines.join("; "),
    }
}

fn criterion_9() -> Outcome {
    let cfg = desk_config();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let start = Instant::now();
        let rows = pool.install(|| sim::run_sweep(&cfg).unwrap());
        (to_csv_string(&rows), start.elapsed())
    };
    let (a, serial) = run(1);
    let (b, parallel) = run(4);
    let same = a == b;
    let fast = parallel <= serial * 2;
    Outcome {
        pass: same && fast,
        detail: format!(
            "{} rows, serial vs 4-thread CSV byte-identical: {same}; runs {:.1}s / {:.1}s",
            a.lines().count() - 1,
            serial.as_secs_f64(),
            parallel.as_secs_f64()
        ),
    }
}

fn main() {
    let mut all = true;
    let mut guarantee = Vec::new();
    all &= report(1, "SDP solver vs largest eigenvalue", Duration::from_secs(5), criterion_1);
    all &= report(2, "lifted-form equivalence", Duration::from_secs(10), criterion_2);
    all &= report(3, "Monte-Carlo oracles", Duration::from_secs(60), criterion_3);
    all &= report(4, "RIS output power bound", Duration::from_secs(60), criterion_4);
    all &= report(5, "rank-1 recovery contract", Duration::from_secs(300), criterion_5);
    all &= report(6, "randomization quality", Duration::from_secs(120), criterion_6);
    all &= report(7, "scheme ordering", Duration::from_secs(1800), || criterion_7(&mut guarantee));
    all &= report(8, "monotone trends", Duration::from_secs(3600), || criterion_8(&mut guarantee));
    all &= report(9, "determinism", Duration::from_secs(3600), criterion_9);
    all &= report(10, "alternation guarantee", Duration::from_secs(1), || Outcome {
        pass: guarantee.is_empty(),
        detail: if guarantee.is_empty() {
            "best-so-far monotone and per-row feasibility held in every trace of criteria 7-8".into()
        } else {
            guarantee.join("; ")
        },
    });
    if !all {
        std::process::exit(1);
    }
}
