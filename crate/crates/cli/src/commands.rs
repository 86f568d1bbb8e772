use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use cr_spectra::basis::monomial_basis;
use cr_spectra::balance::{solve_balance, WeightedMeasure, BALANCE_TOLERANCE};
use cr_spectra::moebius::{cayley_to_siegel, cayley_to_sphere, DEFAULT_FD_STEP};
use cr_spectra::spectral::{assemble, invariant_report, solve};
use cr_spectra::{
    compose, pullback_residual, ConformalFactor, CrAutomorphism, CrMap, Error, FactorSpec, QuadratureRule,
    SpectralResult, SpherePoint,
};

use crate::config::{Family, RunConfig};
use crate::output::{num, Report, Table};
use crate::CliError;

/// Errors that stem from the configured inputs rather than from the numerics.
fn classify(e: Error) -> CliError {
    match e {
        Error::InvalidFactor(_)
        | Error::NonPositiveFactor { .. }
        | Error::Parse { .. }
        | Error::DimensionMismatch { .. }
        | Error::OffSphere { .. }
        | Error::InvalidRule(_)
        | Error::BudgetExceeded { .. }
        | Error::InvalidAutomorphism(_) => CliError::Config(e.to_string()),
        Error::FieldEvaluation { source, .. } => classify(*source),
        other => CliError::Numerical(other.to_string()),
    }
}

fn rule(config: &RunConfig) -> Result<QuadratureRule, CliError> {
    QuadratureRule::from_descriptor(config.n, &config.rule).map_err(classify)
}

/// Builds the factor and checks positivity on the rule nodes.
fn factor(spec: &FactorSpec, config: &RunConfig, rule: &QuadratureRule) -> Result<ConformalFactor, CliError> {
    let f = spec.build(config.n).map_err(classify)?;
    f.values_on(rule).map_err(classify)?;
    Ok(f)
}

fn report(f: &ConformalFactor, config: &RunConfig, rule: &QuadratureRule) -> Result<SpectralResult, CliError> {
    invariant_report(f, config.n, config.degree, rule).map_err(classify)
}

pub fn spectrum(config: &RunConfig) -> Result<Report, CliError> {
    let rule = rule(config)?;
    let f = factor(&config.factor, config, &rule)?;
    let basis = monomial_basis(config.n, config.degree).map_err(classify)?;
    let problem = assemble(&f, &basis, &rule).map_err(classify)?;
    let result = solve(&problem, config.count.unwrap_or(usize::MAX)).map_err(classify)?;

    let mut table = Table::new(&["index", "eigenvalue", "cluster", "cluster_value", "cluster_multiplicity"]);
    let mut idx = 0;
    for (ci, (value, mult)) in result.clusters.iter().enumerate() {
        for _ in 0..*mult {
            if let Some(ev) = result.eigenvalues.get(idx) {
                table.push(vec![idx.to_string(), num(*ev), ci.to_string(), num(*value), mult.to_string()]);
            }
            idx += 1;
        }
    }
    Ok(Report {
        code: 0,
        json: json!({ "config": config, "result": result }),
        table,
    })
}

struct Item {
    id: String,
    spec: FactorSpec,
}

fn verify_items(config: &RunConfig) -> Vec<Item> {
    match config.family.unwrap_or(Family::Single) {
        Family::Single => vec![Item {
            id: "configured".into(),
            spec: config.factor.clone(),
        }],
        Family::Extremal => {
            let (pole, scale) = match &config.factor {
                FactorSpec::Extremal {
                    pole: Some(p), scale, ..
                } => (p.clone(), *scale),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    (SpherePoint::random(config.n, &mut rng).coords().to_vec(), 1.0)
                }
            };
            config
                .t_grid
                .iter()
                .flatten()
                .map(|&t| Item {
                    id: format!("extremal(t={t})"),
                    spec: FactorSpec::Extremal {
                        pole: Some(pole.clone()),
                        t,
                        scale,
                    },
                })
                .collect()
        }
        Family::ExpPoly => config
            .eps_grid
            .iter()
            .flatten()
            .flat_map(|&epsilon| {
                (0..config.samples as u64).map(move |k| {
                    let seed = config.seed + k;
                    Item {
                        id: format!("exp_poly(eps={epsilon},seed={seed})"),
                        spec: FactorSpec::RandomExpPoly {
                            seed,
                            epsilon,
                            degree: 2,
                        },
                    }
                })
            })
            .collect(),
    }
}

pub fn verify(config: &RunConfig) -> Result<Report, CliError> {
    let rule = rule(config)?;
    let items = verify_items(config);
    let factors = items
        .iter()
        .map(|item| factor(&item.spec, config, &rule))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<SpectralResult> = factors
        .par_iter()
        .map(|f| report(f, config, &rule))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(&["factor", "lambda1", "volume", "invariant", "bound", "margin", "status"]);
    let mut rows = Vec::new();
    let mut violations = 0;
    for (item, r) in items.iter().zip(&results) {
        let ok = r.margin >= -config.allowance * r.bound;
        violations += usize::from(!ok);
        let status = if ok { "ok" } else { "violation" };
        table.push(vec![
            item.id.clone(),
            num(r.lambda1),
            num(r.volume),
            num(r.invariant),
            num(r.bound),
            num(r.margin),
            status.into(),
        ]);
        rows.push(json!({
            "factor": item.id,
            "spec": item.spec,
            "lambda1": r.lambda1,
            "volume": r.volume,
            "invariant": r.invariant,
            "bound": r.bound,
            "margin": r.margin,
            "status": status,
        }));
    }
    if violations > 0 {
        eprintln!(
            "{violations} of {} factors have margin below −{}·bound; either a defect or insufficient resolution (degree {}, rule {})",
            items.len(),
            config.allowance,
            config.degree,
            config.rule
        );
    }
    Ok(Report {
        code: if violations > 0 { 1 } else { 0 },
        json: json!({ "config": config, "violations": violations, "rows": rows }),
        table,
    })
}

pub fn balance(config: &RunConfig) -> Result<Report, CliError> {
    let rule = rule(config)?;
    let f = factor(&config.factor, config, &rule)?;
    let mu = WeightedMeasure::from_factor(&rule, &f).map_err(classify)?;
    let point = solve_balance(&mu).map_err(|e| match e {
        Error::NoConvergence { .. } => CliError::Numerical(e.to_string()),
        other => classify(other),
    })?;
    let ball = point.ball_point();

    let dim = 2 * config.n + 2;
    let mut header: Vec<String> = Vec::new();
    for j in 1..=dim / 2 {
        header.push(format!("pole_x{j}"));
        header.push(format!("pole_y{j}"));
    }
    header.extend(["t", "residual", "iterations"].map(String::from));
    let mut table = Table::from_header(header);
    let mut row: Vec<String> = point.pole.coords().iter().map(|c| num(*c)).collect();
    row.extend([num(point.t), num(point.residual), point.iterations.to_string()]);
    table.push(row);

    Ok(Report {
        code: if point.residual <= BALANCE_TOLERANCE { 0 } else { 2 },
        json: json!({ "config": config, "balance": point, "ball_point": ball }),
        table,
    })
}

struct Check {
    name: &'static str,
    threshold: f64,
    max: f64,
    samples: usize,
}

/// Largest `t` for which the configured rule resolves the volume integral.
const VOLUME_T_MAX: f64 = 0.5;

fn distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    a.distance(b)
}

pub fn check_identities(config: &RunConfig) -> Result<Report, CliError> {
    let n = config.n;
    let t_max = config.t_max;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sample_t = |rng: &mut ChaCha8Rng| if t_max > 0.0 { rng.random_range(0.0..=t_max) } else { 0.0 };

    let mut pullback = Check { name: "pullback", threshold: 1e-6, max: 0.0, samples: 0 };
    let mut group = Check { name: "group_law", threshold: 1e-10, max: 0.0, samples: 0 };
    let mut cocycle = Check { name: "cocycle", threshold: 1e-10, max: 0.0, samples: 0 };
    let mut cayley = Check { name: "cayley_roundtrip", threshold: 1e-10, max: 0.0, samples: 0 };
    let mut volume_pairs = Vec::with_capacity(config.samples);

    for _ in 0..config.samples {
        let p = SpherePoint::random(n, &mut rng);
        let s = sample_t(&mut rng);
        let t = sample_t(&mut rng);
        let z = SpherePoint::random(n, &mut rng);
        let gs = CrAutomorphism::new(p.clone(), s).map_err(classify)?;
        let gt = CrAutomorphism::new(p.clone(), t).map_err(classify)?;
        let gst = CrAutomorphism::new(p.clone(), s + t).map_err(classify)?;

        pullback.max = pullback.max.max(pullback_residual(&gt, &z, DEFAULT_FD_STEP));
        pullback.samples += 1;

        group.max = group.max.max(distance(&compose(&gs, &gt).map(&z), &gst.apply(&z)));
        group.samples += 1;

        let chained = compose(&gs, &gt).factor(&z);
        let direct = gst.pullback_factor(&z);
        cocycle.max = cocycle.max.max((chained - direct).abs() / direct.max(1.0));
        cocycle.samples += 1;

        if let Ok(w) = cayley_to_siegel(&z) {
            let back = cayley_to_sphere(&w).map_err(classify)?;
            cayley.max = cayley.max.max(distance(&back, &z));
            cayley.samples += 1;
        }

        volume_pairs.push((p, t.min(VOLUME_T_MAX)));
    }

    let mut checks = vec![pullback, group, cocycle, cayley];
    // the volume law needs an exact-degree rule; Monte Carlo cannot reach its threshold
    let rule = rule(config)?;
    if rule.exact_degree() > 0 {
        let v0 = rule.volume();
        let mut volume = Check { name: "volume_law", threshold: 1e-8, max: 0.0, samples: 0 };
        for (p, t) in volume_pairs {
            let f = ConformalFactor::extremal(p, t, 1.0).map_err(classify)?;
            let v = rule.integrate_fn(|z| f.eval(z).powi(n as i32 + 1));
            volume.max = volume.max.max((v - v0).abs());
            volume.samples += 1;
        }
        checks.push(volume);
    }

    let mut table = Table::new(&["check", "max_residual", "threshold", "samples", "status"]);
    let mut rows = Vec::new();
    let mut breaches = 0;
    for c in &checks {
        let ok = c.max <= c.threshold;
        breaches += usize::from(!ok);
        let status = if ok { "ok" } else { "breach" };
        table.push(vec![c.name.into(), num(c.max), num(c.threshold), c.samples.to_string(), status.into()]);
        rows.push(json!({
            "check": c.name,
            "max_residual": c.max,
            "threshold": c.threshold,
            "samples": c.samples,
            "status": status,
        }));
    }
    Ok(Report {
        code: if breaches > 0 { 1 } else { 0 },
        json: json!({ "config": config, "checks": Value::Array(rows) }),
        table,
    })
}
