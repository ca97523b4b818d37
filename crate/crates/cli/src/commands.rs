use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use slelab::cle_measure::{
    cle4_measure_via_coupling, estimate_xi, markov_restriction_test, pushforward_covariant, radial_profile,
    rotate_soup, uniqueness_normalization_check, CarpetMeasure, MarkRule, MarkovConfig, Mobius, SubDomain, XiConfig,
};
use slelab::gmc::sample_stable_jumps;
use slelab::grid::Grid;
use slelab::loewner::{sample_sle_driving, trace_from_driving, LoewnerTrace, SlitScheme};
use slelab::loopsoup::{cle_from_soup, expected_root_count, sample_cle, CleConfig};
use slelab::natural_param::{box_dimension, estimate_mu0, intensity_shape, polyline_box_dimension, Mu0Config};
use slelab::params::{carpet_dimension, carpet_dimension_expanded, derive_params};
use slelab::rng::derive_seed;
use slelab::special::quadrature::integrate;
use slelab::special::{analytic_h, h_ode_check, integrate_h_ode, simulate_radial_bessel, BesselDensitySpec};
use slelab::stats::{ks_one_sample, ks_two_sample, Summary};

use crate::config::{default_c_sequence, RunConfig};
use crate::manifest::Recorder;
use crate::svg;
use crate::CmdError;

pub const SUBCOMMANDS: [&str; 14] = [
    "params",
    "sle-trace",
    "dim-est",
    "loop-soup",
    "carpet",
    "xi-estimate",
    "mu0-estimate",
    "covariance-check",
    "markov-test",
    "cle4-coupling",
    "ode-check",
    "bessel-check",
    "stable-scaling",
    "uniqueness-check",
];

pub fn run(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    match cfg.subcommand.as_str() {
        "params" => params(cfg, rec),
        "sle-trace" => sle_trace(cfg, rec, pool),
        "dim-est" => dim_est(cfg, rec, pool),
        "loop-soup" => loop_soup(cfg, rec, pool),
        "carpet" => carpet(cfg, rec, pool),
        "xi-estimate" => xi_estimate(cfg, rec, pool),
        "mu0-estimate" => mu0_estimate(cfg, rec, pool),
        "covariance-check" => covariance_check(cfg, rec, pool),
        "markov-test" => markov_test(cfg, rec),
        "cle4-coupling" => cle4_coupling(cfg, rec, pool),
        "ode-check" => ode_check(cfg, rec),
        "bessel-check" => bessel_check(cfg, rec),
        "stable-scaling" => stable_scaling(cfg, rec, pool),
        "uniqueness-check" => uniqueness_check(cfg, rec, pool),
        other => Err(CmdError::Config(crate::config::ConfigError::new(
            "subcommand",
            format!("unknown subcommand `{other}`"),
        ))),
    }
}

/// Runs `f` for every item on the worker pool; results keep the input order.
fn fan_out<T: Send, I: Sync + Copy>(
    pool: &ThreadPool,
    items: &[I],
    f: impl Fn(I) -> slelab::Result<T> + Sync + Send,
) -> slelab::Result<Vec<T>> {
    pool.install(|| items.par_iter().map(|&i| f(i)).collect())
}

fn params(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CmdError> {
    let kappa = cfg.kappa()?;
    let p = derive_params(kappa)?;
    let gap = (carpet_dimension(kappa)? - carpet_dimension_expanded(kappa)).abs();
    rec.check("closed forms of d(κ) agree", gap < 1e-12, format!("gap {gap:.2e}"));
    rec.json("params.json", &p)?;
    println!("{}", serde_json::to_string_pretty(&p).map_err(std::io::Error::other)?);
    Ok(())
}

fn cle_config(cfg: &RunConfig, default_grid: usize) -> Result<CleConfig, CmdError> {
    Ok(CleConfig::new(cfg.kappa()?, cfg.grid_or(default_grid)))
}

fn xi_config(cfg: &RunConfig) -> XiConfig {
    XiConfig {
        eps: cfg.eps_or(0.3),
        n_fields: cfg.n_fields.unwrap_or(8),
        circle_radius: 0.02,
        field_n: 257,
        mark_rule: MarkRule::QuantumLength,
    }
}

fn trace(kappa: f64, steps: usize, seed: u64) -> slelab::Result<LoewnerTrace> {
    let d = sample_sle_driving(kappa, 1.0 / steps as f64, steps, seed)?;
    Ok(trace_from_driving(&d, SlitScheme::Tilted))
}

fn sle_trace(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let kappa = cfg.kappa()?;
    let steps = cfg.steps.unwrap_or(20_000);
    let traces = rec.stage("traces", || fan_out(pool, &cfg.seeds, |s| trace(kappa, steps, s)))?;
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        points: usize,
        max_abs: f64,
    }
    let mut rows = Vec::new();
    for (&seed, tr) in cfg.seeds.iter().zip(&traces) {
        rec.csv(&format!("trace_seed{seed}.csv"), &tr.to_csv())?;
        rec.svg(&format!("trace_seed{seed}.svg"), || svg::scatter(&tr.points))?;
        let finite = tr.points.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        rec.check(format!("trace {seed} finite"), finite, format!("{} points", tr.points.len()));
        rows.push(Row {
            seed,
            points: tr.points.len(),
            max_abs: tr.points.iter().map(|z| z.norm()).fold(0.0, f64::max),
        });
    }
    rec.json("sle_trace.json", &rows)?;
    Ok(())
}

fn dim_est(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let kappa = cfg.kappa()?;
    let steps = cfg.steps.unwrap_or(100_000);
    let dims = rec.stage("box counting", || {
        fan_out(pool, &cfg.seeds, |s| {
            let tr = trace(kappa, steps, s)?;
            let diam = tr.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sides: Vec<f64> = (4..=8).map(|k| diam / 2f64.powi(k)).collect();
            polyline_box_dimension(&tr.points, &sides)
        })
    })?;
    let mean = Summary::of(&dims.iter().map(|d| d.dimension).collect::<Vec<_>>()).mean;
    let target = (1.0 + kappa / 8.0).min(2.0);
    rec.check(
        "trace box dimension within 0.1 of 1+κ/8",
        (mean - target).abs() <= 0.1,
        format!("{mean:.3} vs {target:.3}"),
    );
    let mut csv = String::from("seed,dimension\n");
    for (s, d) in cfg.seeds.iter().zip(&dims) {
        csv.push_str(&format!("{s},{}\n", d.dimension));
    }
    rec.csv("dimensions.csv", &csv)?;
    rec.json("dim_est.json", &dims)?;
    Ok(())
}

fn loop_soup(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let cc = cle_config(cfg, 128)?;
    let soups = rec.stage("soups", || fan_out(pool, &cfg.seeds, |s| sample_cle(&cc, s).map(|r| r.0)))?;
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        loops: usize,
        proposed: usize,
        expected_proposed: f64,
        acceptance_rate: f64,
    }
    let mut rows = Vec::new();
    for (&seed, soup) in cfg.seeds.iter().zip(&soups) {
        let expected = expected_root_count(soup.domain.box_area(), soup.intensity, soup.t_min, soup.t_cap)?;
        let z = (soup.proposed as f64 - expected) / expected.sqrt().max(1e-300);
        rec.check(format!("soup {seed} proposal count"), z.abs() < 4.0, format!("z = {z:.2}"));
        let mut csv = String::from("loop,root_re,root_im,duration,points\n");
        for (k, l) in soup.loops.iter().enumerate() {
            csv.push_str(&format!("{k},{},{},{},{}\n", l.root.re, l.root.im, l.duration, l.polyline.len()));
        }
        rec.csv(&format!("soup_seed{seed}.csv"), &csv)?;
        rec.svg(&format!("soup_seed{seed}.svg"), || {
            let roots: Vec<Complex64> = soup.loops.iter().map(|l| l.root).collect();
            svg::scatter(&roots)
        })?;
        rows.push(Row {
            seed,
            loops: soup.len(),
            proposed: soup.proposed,
            expected_proposed: expected,
            acceptance_rate: soup.acceptance_rate(),
        });
    }
    rec.json("loop_soup.json", &rows)?;
    Ok(())
}

fn carpet(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let cc = cle_config(cfg, 256)?;
    let samples = rec.stage("carpets", || fan_out(pool, &cfg.seeds, |s| sample_cle(&cc, s).map(|r| r.1)))?;
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        loops: usize,
        carpet_fraction: f64,
        box_dimension: f64,
        d_carpet: f64,
    }
    let d = carpet_dimension(cc.kappa)?;
    let mut rows = Vec::new();
    for (&seed, cle) in cfg.seeds.iter().zip(&samples) {
        let inside = (0..cle.grid.len()).filter(|&k| cle.grid.center_of(k).norm() < 1.0).count();
        let frac = cle.carpet.count() as f64 / inside.max(1) as f64;
        rec.check(format!("carpet {seed} is a proper subset"), frac > 0.0 && frac < 1.0, format!("fraction {frac:.3}"));
        let top = (cc.grid / 8).max(8);
        let scales: Vec<usize> = (0..).map(|k| 1usize << k).skip_while(|&s| s < 2).take_while(|&s| s <= top).collect();
        let dim = if scales.len() >= 4 {
            box_dimension(&cle.carpet, &scales)?.dimension
        } else {
            f64::NAN
        };
        rec.csv(&format!("carpet_seed{seed}.csv"), &cle.carpet_csv())?;
        rec.svg(&format!("carpet_seed{seed}.svg"), || {
            let v: Vec<f64> = cle.carpet.cells.iter().map(|&c| c as u8 as f64).collect();
            svg::heatmap(&v, cle.grid.nx, cle.grid.ny)
        })?;
        rows.push(Row {
            seed,
            loops: cle.n_loops(),
            carpet_fraction: frac,
            box_dimension: dim,
            d_carpet: d,
        });
    }
    rec.json("carpet.json", &rows)?;
    Ok(())
}

fn xi_ensemble(cc: &CleConfig, xi: &XiConfig, seeds: &[u64], pool: &ThreadPool) -> slelab::Result<Vec<CarpetMeasure>> {
    fan_out(pool, seeds, |s| {
        let (_, cle) = sample_cle(cc, s)?;
        estimate_xi(&cle, xi, derive_seed(s, 1))
    })
}

fn xi_estimate(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let cc = cle_config(cfg, 128)?;
    let xi = xi_config(cfg);
    let ms = rec.stage("xi", || xi_ensemble(&cc, &xi, &cfg.seeds, pool))?;
    for (&seed, m) in cfg.seeds.iter().zip(&ms) {
        let v = m.support_violations();
        rec.check(format!("xi {seed} supported on the carpet"), v == 0, format!("{v} violating cells"));
        rec.csv(&format!("xi_seed{seed}.csv"), &m.to_csv())?;
        rec.svg(&format!("xi_seed{seed}.svg"), || svg::heatmap(&m.masses, m.grid.nx, m.grid.ny))?;
        rec.json(&format!("xi_seed{seed}.json"), m)?;
    }
    Ok(())
}

fn mu0_estimate(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let kappa = cfg.kappa()?;
    let nx = cfg.grid_or(512);
    let steps = cfg.steps.unwrap_or(20_000);
    let n_traces = cfg.n_traces.unwrap_or(20);
    let config = Mu0Config {
        kappa,
        eps: cfg.eps_or(0.05),
        grid: Grid::new(-2.0, 0.0, 4.0 / nx as f64, nx, nx / 2),
        fields_per_trace: cfg.n_fields.unwrap_or(10),
        circle_radius: 0.05,
        field_n: 257,
    };
    for &seed in &cfg.seeds {
        let ids: Vec<u64> = (0..n_traces as u64).map(|k| derive_seed(seed, k)).collect();
        let traces = rec.stage("traces", || fan_out(pool, &ids, |s| trace(kappa, steps, s)))?;
        let est = rec.stage("mu0", || estimate_mu0(&traces, &config, seed))?;
        rec.check(
            format!("mu0 {seed} has counted bubbles"),
            est.total() > 0.0,
            format!("{} bubbles, {} excluded", est.bubbles, est.excluded_bubbles),
        );
        // probe-box ratios against the reference shape, reported only
        let half = 0.1;
        let boxed = |c: (f64, f64)| est.box_mass(Complex64::new(c.0 - half, c.1 - half), Complex64::new(c.0 + half, c.1 + half)).0;
        let shape = |c: (f64, f64)| {
            let m = 40;
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let z = Complex64::new(
                        c.0 - half + (i as f64 + 0.5) * 2.0 * half / m as f64,
                        c.1 - half + (j as f64 + 0.5) * 2.0 * half / m as f64,
                    );
                    s += intensity_shape(z, kappa, -0.125);
                }
            }
            s
        };
        let reference = (0.0, 0.5);
        let mut csv = String::from("x,y,ratio,shape_ratio\n");
        for c in [(0.0, 0.25), (0.0, 0.75), (0.35, 0.35), (-0.35, 0.35), (0.5, 0.15), (-0.5, 0.15)] {
            csv.push_str(&format!("{},{},{},{}\n", c.0, c.1, boxed(c) / boxed(reference), shape(c) / shape(reference)));
        }
        rec.csv(&format!("mu0_boxes_seed{seed}.csv"), &csv)?;
        rec.csv(&format!("mu0_seed{seed}.csv"), &est.to_csv())?;
        rec.svg(&format!("mu0_seed{seed}.svg"), || svg::heatmap(&est.mass, est.grid.nx, est.grid.ny))?;
        rec.json(&format!("mu0_seed{seed}.json"), &est)?;
    }
    Ok(())
}

fn covariance_check(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let cc = cle_config(cfg, 128)?;
    let xi = xi_config(cfg);
    let d = carpet_dimension(cc.kappa)?;
    let n = cfg.n_replicas.unwrap_or(100) as u64;
    let theta = 1.0;
    #[derive(Serialize)]
    struct Report {
        seed: u64,
        ks_statistic: f64,
        ks_p_value: f64,
        radial_slope: Option<f64>,
        radial_slope_std_err: Option<f64>,
        expected_slope: f64,
    }
    let mut reports = Vec::new();
    for &seed in &cfg.seeds {
        let ids: Vec<u64> = (0..2 * n).collect();
        let ms = rec.stage("ensembles", || {
            fan_out(pool, &ids, |r| {
                let (soup, cle) = sample_cle(&cc, derive_seed(seed, r))?;
                if r % 2 == 0 {
                    estimate_xi(&cle, &xi, derive_seed(seed, 2 * n + r))
                } else {
                    let turned = cle_from_soup(&rotate_soup(&soup, theta), cc.kappa, cc.grid);
                    let m = estimate_xi(&turned, &xi, derive_seed(seed, 2 * n + r))?;
                    Ok(pushforward_covariant(&m, &Mobius::rotation(-theta), d))
                }
            })
        })?;
        let probe = |m: &CarpetMeasure| m.box_mass(Complex64::new(0.05, 0.05), Complex64::new(0.65, 0.65));
        let a: Vec<f64> = ms.iter().step_by(2).map(probe).collect();
        let b: Vec<f64> = ms.iter().skip(1).step_by(2).map(probe).collect();
        let ks = ks_two_sample(&a, &b);
        let profile = radial_profile(&ms, 8, 0.8)?;
        let fit = profile.fit;
        rec.check(format!("rotation KS {seed}"), ks.passes(0.01), format!("p = {:.3}", ks.p_value));
        let slope_ok = fit.is_some_and(|f| (f.slope - (d - 2.0)).abs() <= 0.15);
        rec.check(
            format!("radial slope {seed}"),
            slope_ok,
            format!("{:?} vs {:.3}", fit.map(|f| f.slope), d - 2.0),
        );
        let mut csv = String::from("one_minus_r2,density,std_err\n");
        for (x, y, e) in &profile.annuli {
            csv.push_str(&format!("{x},{y},{e}\n"));
        }
        rec.csv(&format!("radial_profile_seed{seed}.csv"), &csv)?;
        reports.push(Report {
            seed,
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
            radial_slope: fit.map(|f| f.slope),
            radial_slope_std_err: fit.map(|f| f.slope_std_err),
            expected_slope: d - 2.0,
        });
    }
    rec.json("covariance_check.json", &reports)?;
    Ok(())
}

fn markov_test(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CmdError> {
    let config = MarkovConfig {
        cle: cle_config(cfg, 128)?,
        xi: xi_config(cfg),
        probe: Complex64::new(0.0, 0.5),
        second_probe: Some(Complex64::new(0.0, -0.5)),
    };
    let n = cfg.n_replicas.unwrap_or(50);
    for &seed in &cfg.seeds {
        let r = rec.stage("markov", || markov_restriction_test(&config, &SubDomain::UpperHalfDisk, n, seed))?;
        rec.check(
            format!("markov restriction {seed}"),
            r.passes(0.01),
            format!("KS p = {:.3}, correlation {:?} ± {:?}", r.ks.p_value, r.correlation, r.correlation_se),
        );
        let mut csv = String::from("kind,total\n");
        for t in &r.pushed_totals {
            csv.push_str(&format!("pushed,{t}\n"));
        }
        for t in &r.fresh_totals {
            csv.push_str(&format!("fresh,{t}\n"));
        }
        rec.csv(&format!("markov_totals_seed{seed}.csv"), &csv)?;
        rec.json(&format!("markov_seed{seed}.json"), &r)?;
    }
    Ok(())
}

fn cle4_coupling(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let seq = cfg.c_sequence.clone().unwrap_or_else(default_c_sequence);
    let cc = CleConfig::new(4.0, cfg.grid_or(128));
    let xi = xi_config(cfg);
    let reports = rec.stage("coupling", || fan_out(pool, &cfg.seeds, |s| cle4_measure_via_coupling(&seq, &cc, &xi, s)))?;
    for (&seed, r) in cfg.seeds.iter().zip(&reports) {
        rec.check(
            format!("nested carpets {seed}"),
            r.monotonicity_violations == 0,
            format!("{} violations", r.monotonicity_violations),
        );
        let mut csv = String::from("c,kappa,d,carpet_cells,total\n");
        for l in &r.levels {
            csv.push_str(&format!("{},{},{},{},{}\n", l.c, l.kappa, l.d, l.carpet_cells, l.total));
        }
        rec.csv(&format!("coupling_seed{seed}.csv"), &csv)?;
        rec.csv(&format!("xi4_seed{seed}.csv"), &r.limit().to_csv())?;
        rec.svg(&format!("xi4_seed{seed}.svg"), || svg::heatmap(&r.limit().masses, r.limit().grid.nx, r.limit().grid.ny))?;
    }
    rec.json("cle4_coupling.json", &reports)?;
    Ok(())
}

fn ode_check(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CmdError> {
    let kappa = cfg.kappa()?;
    let grid: Vec<f64> = (0..=2000).map(|i| 0.01 + (PI - 0.02) * i as f64 / 2000.0).collect();
    let residual = rec.stage("residual", || h_ode_check(kappa, &grid));
    let rk_gap = rec.stage("rk4", || {
        (0..=20)
            .map(|i| {
                let end = 0.1 + (PI - 0.2) * i as f64 / 20.0;
                (integrate_h_ode(kappa, end, 20_000) - analytic_h(kappa, end).0).abs()
            })
            .fold(0.0, f64::max)
    });
    rec.check("H-ODE residual < 1e-10", residual < 1e-10, format!("{residual:.2e}"));
    rec.check("RK4 matches analytic H within 1e-6", rk_gap < 1e-6, format!("{rk_gap:.2e}"));
    #[derive(Serialize)]
    struct Report {
        kappa: f64,
        residual: f64,
        rk_gap: f64,
    }
    rec.json("ode_check.json", &Report { kappa, residual, rk_gap })?;
    println!("residual {residual:.3e}, rk gap {rk_gap:.3e}");
    Ok(())
}

fn bessel_check(cfg: &RunConfig, rec: &mut Recorder) -> Result<(), CmdError> {
    let a = 2.0 / cfg.kappa()?;
    let n = cfg.n_replicas.unwrap_or(10_000);
    let s = 0.5;
    let spec = BesselDensitySpec::new(a, s)?;
    let norm_gap = [0.4, PI / 2.0, 2.6]
        .iter()
        .map(|&x| (spec.cdf(x, PI) - 1.0).abs())
        .fold(0.0, f64::max);
    rec.check("density integrates to 1", norm_gap < 1e-6, format!("{norm_gap:.2e}"));
    let (p3, p7, p10) = (
        BesselDensitySpec::new(a, 0.3)?,
        BesselDensitySpec::new(a, 0.7)?,
        BesselDensitySpec::new(a, 1.0)?,
    );
    let ck = [(0.5, 2.0), (1.5, 1.5), (2.8, 0.3)]
        .iter()
        .map(|&(x, y)| {
            let lhs = integrate(|u: f64| p3.density(x, u) * p7.density(u, y), 0.0, PI, 1e-12);
            (lhs - p10.density(x, y)).abs()
        })
        .fold(0.0, f64::max);
    rec.check("Chapman–Kolmogorov", ck < 1e-6, format!("{ck:.2e}"));
    let theta0 = PI / 3.0;
    let mut p_values = Vec::new();
    for &seed in &cfg.seeds {
        let xs = rec.stage("sde", || simulate_radial_bessel(a, theta0, s, 1e-3 * s, n, seed))?;
        let ks = ks_one_sample(&xs, |y| spec.cdf(theta0, y));
        rec.check(format!("SDE endpoints vs density {seed}"), ks.passes(0.01), format!("p = {:.3}", ks.p_value));
        let mut csv = String::from("theta\n");
        for x in &xs {
            csv.push_str(&format!("{x}\n"));
        }
        rec.csv(&format!("bessel_endpoints_seed{seed}.csv"), &csv)?;
        p_values.push(ks.p_value);
    }
    #[derive(Serialize)]
    struct Report {
        a: f64,
        s: f64,
        normalization_gap: f64,
        chapman_kolmogorov_gap: f64,
        ks_p_values: Vec<f64>,
    }
    rec.json(
        "bessel_check.json",
        &Report {
            a,
            s,
            normalization_gap: norm_gap,
            chapman_kolmogorov_gap: ck,
            ks_p_values: p_values,
        },
    )?;
    Ok(())
}

fn stable_scaling(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let alpha_hat = cfg.kappa()? / 4.0;
    let eps0 = cfg.eps_or(1e-2);
    let reps = cfg.n_replicas.unwrap_or(200) as u64;
    let oracle = integrate(|y: f64| y.powf(-alpha_hat - 1.0), 1.0, 2.0, 1e-13);
    let mut csv = String::from("seed,eps,mean,std_err,oracle\n");
    for &seed in &cfg.seeds {
        let mut rows = Vec::new();
        for eps in [eps0, eps0 / 10.0, eps0 / 100.0] {
            let ids: Vec<u64> = (0..reps).collect();
            let xs = rec.stage("jumps", || {
                fan_out(pool, &ids, |r| {
                    let rec = sample_stable_jumps(alpha_hat, 1.0, eps, 1.0, derive_seed(seed, r))?;
                    Ok(eps.powf(alpha_hat) * rec.count_in(eps, 2.0 * eps) as f64)
                })
            })?;
            let sm = Summary::of(&xs);
            csv.push_str(&format!("{seed},{eps},{},{},{oracle}\n", sm.mean, sm.std_err()));
            rows.push((eps, sm.mean, sm.std_err()));
        }
        let mut ok = rows.iter().all(|&(_, m, se)| (m - oracle).abs() < 3.0 * se);
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                ok &= (rows[i].1 - rows[j].1).abs() < 3.0 * (rows[i].2.powi(2) + rows[j].2.powi(2)).sqrt();
            }
        }
        rec.check(format!("ε^α̂·E[N_ε] constant {seed}"), ok, format!("{rows:?} vs {oracle:.4}"));
    }
    rec.csv("stable_scaling.csv", &csv)?;
    Ok(())
}

fn uniqueness_check(cfg: &RunConfig, rec: &mut Recorder, pool: &ThreadPool) -> Result<(), CmdError> {
    let cc = cle_config(cfg, 128)?;
    let coarse = xi_config(cfg);
    let fine = XiConfig {
        eps: coarse.eps / 2.0,
        ..coarse
    };
    let n = cfg.n_replicas.unwrap_or(100) as u64;
    let boxes: Vec<(Complex64, Complex64)> = [
        (-0.2, -0.2, 0.2, 0.2),
        (0.3, -0.15, 0.6, 0.15),
        (-0.15, 0.3, 0.15, 0.6),
        (-0.6, -0.6, -0.3, -0.3),
        (0.45, 0.45, 0.65, 0.65),
    ]
    .iter()
    .map(|&(x0, y0, x1, y1)| (Complex64::new(x0, y0), Complex64::new(x1, y1)))
    .collect();
    let mut reports = Vec::new();
    for &seed in &cfg.seeds {
        let ids_a: Vec<u64> = (0..n).map(|r| derive_seed(seed, 2 * r)).collect();
        let ids_b: Vec<u64> = (0..n).map(|r| derive_seed(seed, 2 * r + 1)).collect();
        let a = rec.stage("coarse", || xi_ensemble(&cc, &coarse, &ids_a, pool))?;
        let b = rec.stage("fine", || xi_ensemble(&cc, &fine, &ids_b, pool))?;
        let r = uniqueness_normalization_check(&a, &b, &boxes)?;
        rec.check(
            format!("normalized ensembles agree {seed}"),
            r.passes(),
            format!("max |z| {:.2}, support violations {}", r.max_abs_z(), r.support_violations),
        );
        reports.push(r);
    }
    rec.json("uniqueness_check.json", &reports)?;
    Ok(())
}
