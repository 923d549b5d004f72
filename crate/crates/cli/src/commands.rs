use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dilatox::ikeda::{p_ch, p_st_ikeda, p_st_radial};
use dilatox::io::{complex_rows, provenance_header, to_json, write_csv, write_samples, VERSION};
use dilatox::mfi::{
    fourier_pairing, measure_charfn, mfi_2d_eval, mfi_box_eval, mfi_eval, moment_via_charfn,
    prefractal, theorem2_bound, weight_bound, FractalSpec, DEFAULT_CAP, NORMALIZATION_TOL,
};
use dilatox::simulate::{compare, empirical_charfn, run_ensemble, Histogram, Metrics, Prediction};
use dilatox::stationary::{
    density_from_charfn, GaussKa, LinearDet, LinearGauss, SolvedModel, StationaryLaw,
};
use dilatox::{Grid, RngSeed, State};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    CompareConfig, IkedaConfig, MfiConfig, Route, RunConfig, SimulateConfig, StationaryConfig,
    StationaryModel,
};
use crate::failure::Failure;

/// Everything a command needs besides its own table.
pub struct Context {
    pub configs: Vec<RunConfig>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub unchecked: bool,
}

impl Context {
    /// First occurrence of a table across the given config files.
    fn table<T: Clone>(
        &self,
        pick: impl Fn(&RunConfig) -> Option<&T>,
        name: &str,
    ) -> Result<T, Failure> {
        self.configs
            .iter()
            .find_map(|c| pick(c).cloned())
            .ok_or_else(|| Failure::config(format!("no [{name}] table in the given config")))
    }

    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    fn simulate_table(&self) -> Result<SimulateConfig, Failure> {
        let mut cfg = self.table(|c| c.simulate.as_ref(), "simulate")?;
        if let Some(seed) = self.seed {
            cfg.ensemble.seed = RngSeed(seed);
        }
        Ok(cfg)
    }
}

fn csv_file(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    fs::write(path, to_json(value)?)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn grid_columns(grid: &Grid, stem: &str) -> Vec<String> {
    match grid {
        Grid::D1(_) => vec![stem.to_string()],
        Grid::D2(_) => vec![format!("{stem}1"), format!("{stem}2")],
    }
}

fn columns<'a>(head: &'a [String], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter()
        .map(String::as_str)
        .chain(tail.iter().copied())
        .collect()
}

fn solve_model(cfg: &StationaryConfig) -> Result<SolvedModel, Failure> {
    Ok(match cfg.model.clone() {
        StationaryModel::Det { a, kappa } => SolvedModel::Det(LinearDet::new(a, kappa)?),
        StationaryModel::Gauss { a, kappa, r } => {
            SolvedModel::Gauss(LinearGauss::new(a, kappa, r)?)
        }
        StationaryModel::GaussKa { kappa, r, ka } => {
            SolvedModel::GaussKa(GaussKa::new(kappa, r, ka, cfg.trunc)?)
        }
    })
}

pub fn stationary(ctx: &Context) -> Result<String, Failure> {
    let cfg: StationaryConfig = ctx.table(|c| c.stationary.as_ref(), "stationary")?;
    let header = provenance_header("stationary", &cfg)?;
    let model = solve_model(&cfg)?;
    let cf = model.charfn(&cfg.u_grid)?;
    let residual = model.functional_equation_residual(&cfg.u_grid);
    let u_cols = grid_columns(&cfg.u_grid, "u");
    write_csv(
        csv_file(&ctx.path("charfn.csv"))?,
        &header,
        &columns(&u_cols, &["re", "im"]),
        complex_rows(cfg.u_grid.points(), &cf.values),
    )?;

    let mut report = json!({
        "version": VERSION,
        "command": "stationary",
        "config": cfg,
        "kappa": model.kappa(),
        "dim": model.dim(),
        "singular": cf.singular,
        "functional_equation_residual": residual,
        "max_terms_used": cf.max_terms_used(),
        "unconverged_points": cf.unconverged,
    });
    match &model {
        SolvedModel::Det(m) => report["fixed_point"] = json!(m.fixed_point()),
        SolvedModel::Gauss(m) => {
            report["mean"] = json!(m.mean());
            report["variance"] = json!(m.component_variance());
        }
        SolvedModel::GaussKa(_) => {}
    }
    if let Some(xg) = &cfg.x_grid {
        let d = density_from_charfn(&cf, xg)?;
        let x_cols = grid_columns(xg, "x");
        write_csv(
            csv_file(&ctx.path("density.csv"))?,
            &header,
            &columns(&x_cols, &["density"]),
            xg.points().zip(&d.density.values).map(|(p, v)| {
                let mut row = p.as_slice().to_vec();
                row.push(*v);
                row
            }),
        )?;
        report["density"] = json!({
            "mass": d.density.integral(),
            "boundary_max": d.boundary_max,
            "decay_warning": d.decay_warning,
        });
    }
    write_json(&ctx.path("stationary.json"), &report)?;
    Ok(format!(
        "stationary: {} frequencies, residual {residual:.3e}",
        cfg.u_grid.len()
    ))
}

fn fractal_spec(cfg: &MfiConfig, unchecked: bool) -> Result<FractalSpec, Failure> {
    let f = &cfg.fractal;
    let spec =
        FractalSpec::new_unchecked(f.kappa, f.lambda_star, f.levels.clone(), f.weights.clone())?;
    if spec.normalization_defect() <= NORMALIZATION_TOL {
        return Ok(FractalSpec::new(
            f.kappa,
            f.lambda_star,
            f.levels.clone(),
            f.weights.clone(),
        )?);
    }
    if !unchecked {
        return Err(Failure::policy(format!(
            "weights sum to {} instead of L = {} (defect {:.3e}); pass --unchecked to evaluate anyway",
            f.weights.iter().sum::<dilatox::Complex64>(),
            f.levels.len(),
            spec.normalization_defect()
        )));
    }
    Ok(spec)
}

pub fn mfi(ctx: &Context) -> Result<String, Failure> {
    let cfg: MfiConfig = ctx.table(|c| c.mfi.as_ref(), "mfi")?;
    let spec = fractal_spec(&cfg, ctx.unchecked)?;
    let header = provenance_header("mfi", &cfg)?;
    let f = cfg.integrand;
    let opts = cfg.options;
    let bound = weight_bound(&spec);
    let mut report = json!({
        "version": VERSION,
        "command": "mfi",
        "config": cfg,
        "normalization_defect": spec.normalization_defect(),
        "weight_bound": bound,
    });
    let summary = match cfg.route {
        Route::Fourier => {
            let value = match (f.fourier_terms(), f) {
                (Some(terms), _) => fourier_pairing(&spec, &terms, &cfg.trunc)?,
                (None, crate::config::Integrand::Power { k }) => moment_via_charfn(&spec, k)?,
                _ => unreachable!("every integrand is trigonometric or a power"),
            };
            report["result"] = json!({ "value": value });
            format!("mfi (fourier): {value}")
        }
        route => {
            let result = match route {
                Route::Point => mfi_eval(&spec, |x| f.eval(x), &opts)?,
                Route::Box => mfi_box_eval(&spec, |x| f.eval(x), &opts)?,
                Route::Plane { kappa_x, kappa_y } => {
                    mfi_2d_eval(&spec, kappa_x, kappa_y, |x, _| f.eval(x), &opts)?
                }
                Route::Fourier => unreachable!(),
            };
            if let (Some(m), Route::Point) = (opts.derivative_bound, route) {
                let bounds: Vec<f64> = (0..result.trace.len())
                    .map(|n| theorem2_bound(m, bound.g, spec.kappa(), n))
                    .collect();
                report["tail_bound_by_generation"] = json!(bounds);
            }
            if !result.converged {
                eprintln!(
                    "warning: not converged after n = {} (gap {:.3e} > tol {:.3e})",
                    result.n_final, result.cauchy_gap, opts.tol
                );
            }
            let s = format!(
                "mfi: {} at n = {} (gap {:.3e}, converged {})",
                result.value, result.n_final, result.cauchy_gap, result.converged
            );
            report["result"] = json!(result);
            s
        }
    };
    if let Some(n) = cfg.prefractal_generation {
        let pts = prefractal(&spec, n).materialize(DEFAULT_CAP)?;
        write_csv(
            csv_file(&ctx.path("prefractal.csv"))?,
            &header,
            &["lambda", "re_theta", "im_theta"],
            pts.iter().map(|p| [p.lambda, p.theta.re, p.theta.im]),
        )?;
    }
    if let Some(g) = &cfg.charfn_grid {
        let cf = measure_charfn(&spec, g, &cfg.trunc)?;
        write_csv(
            csv_file(&ctx.path("measure_charfn.csv"))?,
            &header,
            &["omega", "re", "im"],
            complex_rows(Grid::D1(*g).points(), &cf.values),
        )?;
        report["measure_charfn_unconverged"] = json!(cf.unconverged);
    }
    write_json(&ctx.path("mfi.json"), &report)?;
    Ok(summary)
}

pub fn ikeda(ctx: &Context) -> Result<String, Failure> {
    let cfg: IkedaConfig = ctx.table(|c| c.ikeda.as_ref(), "ikeda")?;
    let header = provenance_header("ikeda", &cfg)?;
    let ch = p_ch(cfg.kappa, &cfg.r_grid, &cfg.trunc, &cfg.hankel)?;
    write_csv(
        csv_file(&ctx.path("p_ch.csv"))?,
        &header,
        &["r", "density", "cdf"],
        (0..cfg.r_grid.count).map(|i| [cfg.r_grid.point(i), ch.density[i], ch.cdf[i]]),
    )?;
    let k = cfg.kappa;
    let mut report = json!({
        "version": VERSION,
        "command": "ikeda",
        "config": cfg,
        "chaotic": {
            "mass": ch.mass,
            "min_unclipped": ch.min_unclipped,
            "limit_used": ch.limit_used,
            "support": [k - k * k / (1.0 - k), k / (1.0 - k)],
        },
    });
    let mut summary = format!("ikeda: chaotic mass {:.6}", ch.mass);
    if let Some(r) = cfg.noise_r {
        let radial = p_st_radial(k, r, &cfg.r_grid, &cfg.trunc, &cfg.hankel)?;
        write_csv(
            csv_file(&ctx.path("p_st_radial.csv"))?,
            &header,
            &["r", "density", "cdf"],
            (0..cfg.r_grid.count).map(|i| [cfg.r_grid.point(i), radial.density[i], radial.cdf[i]]),
        )?;
        report["noisy_radial"] =
            json!({ "mass": radial.mass, "min_unclipped": radial.min_unclipped });
        if let Some(g) = &cfg.plane_grid {
            let p = p_st_ikeda(k, r, g, &cfg.trunc, &cfg.hankel)?;
            write_csv(
                csv_file(&ctx.path("p_st.csv"))?,
                &header,
                &["x", "y", "density"],
                (0..g.len()).map(|i| {
                    let (x, y) = g.point(i);
                    [x, y, p.density.values[i]]
                }),
            )?;
            report["noisy_plane"] = json!({ "mass": p.mass, "min_unclipped": p.min_unclipped });
            summary.push_str(&format!(", noisy plane mass {:.6}", p.mass));
        }
    }
    write_json(&ctx.path("ikeda.json"), &report)?;
    Ok(summary)
}

pub fn simulate(ctx: &Context) -> Result<String, Failure> {
    let cfg = ctx.simulate_table()?;
    let header = provenance_header("simulate", &cfg)?;
    let s = run_ensemble(&cfg.ensemble)?;
    let mut report = json!({
        "version": VERSION,
        "command": "simulate",
        "config": cfg,
        "summary": s,
    });
    if cfg.write_samples {
        let mut w = csv_file(&ctx.path("samples.bin"))?;
        write_samples(&mut w, &s.samples)?;
    }
    if let Some(binning) = cfg.histogram {
        let mut hists = vec![];
        for k in 0..s.dim {
            let values: Vec<f64> = s.samples.iter().map(|x| x[k]).collect();
            let h = Histogram::new(&values, binning)?;
            write_csv(
                csv_file(&ctx.path(&format!("histogram_{k}.csv")))?,
                &header,
                &["center", "density"],
                h.density
                    .iter()
                    .enumerate()
                    .map(|(i, d)| [h.lo + (i as f64 + 0.5) * h.width, *d]),
            )?;
            hists.push(json!({ "component": k, "bins": h.density.len(), "width": h.width }));
        }
        report["histograms"] = json!(hists);
    }
    if let Some(g) = &cfg.charfn_grid {
        let ecf = empirical_charfn(&s.samples, g)?;
        let u_cols = grid_columns(g, "u");
        write_csv(
            csv_file(&ctx.path("empirical_charfn.csv"))?,
            &header,
            &columns(&u_cols, &["re", "im"]),
            complex_rows(g.points(), &ecf.values),
        )?;
    }
    if let Some(center) = &cfg.radial_center {
        let cdf = s.radial_cdf(center)?;
        let n = cdf.len() as f64;
        write_csv(
            csv_file(&ctx.path("radial_cdf.csv"))?,
            &header,
            &["r", "cdf"],
            cdf.sorted()
                .iter()
                .enumerate()
                .map(|(i, r)| [*r, (i + 1) as f64 / n]),
        )?;
    }
    write_json(&ctx.path("summary.json"), &report)?;
    Ok(format!(
        "simulate: {} samples, mean {:?}, variance {:?}",
        s.count, s.mean, s.variance
    ))
}

fn check(
    name: &str,
    value: Option<f64>,
    limit: Option<f64>,
    failures: &mut Vec<String>,
) -> Result<(), Failure> {
    match (value, limit) {
        (None, Some(_)) => Err(Failure::config(format!(
            "threshold for {name} given but the prediction does not produce it"
        ))),
        (Some(v), Some(l)) if !(v <= l) => {
            failures.push(format!("{name} = {v:.4e} exceeds {l:.4e}"));
            Ok(())
        }
        _ => Ok(()),
    }
}

pub fn compare_cmd(ctx: &Context) -> Result<String, Failure> {
    let sim = ctx.simulate_table()?;
    sim.ensemble.validate()?;
    let thresholds: CompareConfig = ctx
        .table(|c| c.compare.as_ref(), "compare")
        .unwrap_or_default();
    let mut merged = RunConfig {
        simulate: Some(sim.clone()),
        compare: Some(thresholds),
        ..Default::default()
    };
    // predictions first: they validate their tables before the ensemble runs
    let mut predictions = vec![];
    if let Ok(st) = ctx.table(|c| c.stationary.as_ref(), "stationary") {
        let cf = solve_model(&st)?.charfn(&st.u_grid)?.to_grid_function();
        predictions.push(Prediction::CharFn(cf));
        merged.stationary = Some(st);
    } else if let Ok(ik) = ctx.table(|c| c.ikeda.as_ref(), "ikeda") {
        let center = State::new(&[1.0, 0.0])?;
        let law = match ik.noise_r {
            None => p_ch(ik.kappa, &ik.r_grid, &ik.trunc, &ik.hankel)?,
            Some(r) => p_st_radial(ik.kappa, r, &ik.r_grid, &ik.trunc, &ik.hankel)?,
        };
        predictions.push(Prediction::Radial { law, center });
        if let (Some(r), Some(g)) = (ik.noise_r, &ik.plane_grid) {
            let p = p_st_ikeda(ik.kappa, r, g, &ik.trunc, &ik.hankel)?;
            predictions.push(Prediction::Planar(p.density));
        }
        merged.ikeda = Some(ik);
    } else {
        return Err(Failure::config(
            "compare needs a [stationary] or [ikeda] table to predict from",
        ));
    }
    let s = run_ensemble(&sim.ensemble)?;
    let mut metrics = Metrics::default();
    for p in &predictions {
        let m = compare(p, &s)?;
        metrics.charfn_sup = metrics.charfn_sup.or(m.charfn_sup);
        metrics.ks = metrics.ks.or(m.ks);
        metrics.l1 = metrics.l1.or(m.l1);
    }
    let mut failures = vec![];
    check(
        "charfn_sup",
        metrics.charfn_sup,
        thresholds.max_charfn_sup,
        &mut failures,
    )?;
    check("ks", metrics.ks, thresholds.max_ks, &mut failures)?;
    check("l1", metrics.l1, thresholds.max_l1, &mut failures)?;
    let report = json!({
        "version": VERSION,
        "command": "compare",
        "config": merged,
        "samples": s.count,
        "metrics": metrics,
        "pass": failures.is_empty(),
        "failures": failures,
    });
    write_json(&ctx.path("compare.json"), &report)?;
    let shown: Vec<String> = [
        ("charfn_sup", metrics.charfn_sup),
        ("ks", metrics.ks),
        ("l1", metrics.l1),
    ]
    .iter()
    .filter_map(|(name, v)| v.map(|v| format!("{name} {v:.3e}")))
    .collect();
    if failures.is_empty() {
        Ok(format!("compare: pass ({})", shown.join(", ")))
    } else {
        Err(Failure::numerical(format!(
            "compare: fail: {}",
            failures.join("; ")
        )))
    }
}
