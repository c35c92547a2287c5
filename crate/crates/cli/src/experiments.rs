use std::f64::consts::TAU;
use std::fmt::Write as _;

use anyhow::Result;
use clap::Subcommand;
use hardylab_core::conjugations::{Conjugation, ConjugationKind};
use hardylab_core::eigensystems::{gram_minimality_experiment, koenigs_check, spectrum_spiral};
use hardylab_core::hardy::HardyVec;
use hardylab_core::moebius::Moebius;
use hardylab_core::operators::{comp_matrix, commutant_dim, elliptic_sum, orbit_projection_test};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{num, pass_fail, Report, Table};
use crate::{parse_alpha, parse_dim, parse_map};

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// csym residual of C_{phi_alpha} against J_alpha over several dimensions.
    JalphaResidual {
        #[arg(long, default_value = "0.5", value_parser = parse_alpha, allow_hyphen_values = true)]
        alpha: Complex64,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64", value_parser = parse_dim)]
        dims: Vec<usize>,
    },
    /// Dimension of the commutant of {T, T*} for a compressed operator.
    CommutantDim {
        #[arg(long, default_value = "-1,0.5,-0.5,1", value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        /// Compression size; the linear system has 2 size^4 entries.
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u16).range(2..=32))]
        size: u16,
    },
    /// T^2 = order T for the sum of the iterates of phi_alpha o e^{2 pi i/order} z o phi_alpha.
    EllipticSum {
        #[arg(long, default_value = "0.5", value_parser = parse_alpha, allow_hyphen_values = true)]
        alpha: Complex64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=64))]
        order: u32,
    },
    /// Distance of psi_target from spans of psi_t on a uniform grid.
    ParabolicGram {
        #[arg(long, default_value = "1,1,-1,3", value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        #[arg(long, default_value_t = 0.125)]
        step: f64,
        #[arg(long, default_value_t = 32)]
        count: usize,
        #[arg(long, default_value_t = 0.0625)]
        target: f64,
    },
    /// Eigenvalues e^{iat} on a grid of t in [0, tmax].
    SpectrumSpiral {
        #[arg(long, default_value = "1,1,-1,3", value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        #[arg(long, default_value_t = 6.0)]
        tmax: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Closed form against iteration for seeded random attractive maps.
    KoenigsCheck {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// <K_alpha, T^n f> along an orbit with a seeded random start vector.
    OrbitTest {
        #[arg(long, default_value = "1,0,-1,2", value_parser = parse_map, allow_hyphen_values = true)]
        map: Moebius,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub seed: u64,
    pub tol: Option<f64>,
}

fn envelope(name: &str, claim: &str, dim: usize, thresholds: Value, ok: bool, data: Value) -> Value {
    json!({
        "experiment": name,
        "claim": claim,
        "dim": dim,
        "thresholds": thresholds,
        "verdict_of_check": pass_fail(ok),
        "data": data,
    })
}

pub fn run(exp: &Experiment, cfg: ExperimentConfig) -> Result<Report> {
    match exp {
        Experiment::JalphaResidual { alpha, dims } => jalpha_residual(*alpha, dims, cfg),
        Experiment::CommutantDim { map, size } => commutant(map, *size as usize, cfg),
        Experiment::EllipticSum { alpha, order } => elliptic(*alpha, *order, cfg),
        Experiment::ParabolicGram { map, step, count, target } => gram(map, *step, *count, *target, cfg),
        Experiment::SpectrumSpiral { map, tmax, steps } => spiral(map, *tmax, *steps),
        Experiment::KoenigsCheck { count } => koenigs_random(*count, cfg),
        Experiment::OrbitTest { map, steps } => orbit(map, *steps, cfg),
    }
}

fn jalpha_residual(alpha: Complex64, dims: &[usize], cfg: ExperimentConfig) -> Result<Report> {
    let f = Moebius::disk_involution(alpha)?;
    let factor = 10.0;
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut pretty = format!("csym residual of C_phi for phi = {f} against J_alpha\n");
    for &n in dims {
        let c = Conjugation::build(ConjugationKind::JAlpha { alpha }, n)?;
        let r = c.csym_residual(&comp_matrix(&f, n)?)?;
        let ax = c.axioms();
        let _ = writeln!(
            pretty,
            "N = {n:>3} (working {:>4}): residual {r:.3e}, unitarity {:.2e}, involution {:.2e}",
            c.working_dim(),
            ax.unitarity,
            ax.involution
        );
        rows.push(vec![n.to_string(), c.working_dim().to_string(), num(r), num(ax.unitarity), num(ax.involution)]);
        data.push(json!({ "dim": n, "working_dim": c.working_dim(), "residual": r, "axioms": ax }));
    }
    let res: Vec<f64> = data.iter().map(|d| d["residual"].as_f64().unwrap_or(f64::NAN)).collect();
    let decreasing = res.windows(2).all(|w| w[1] <= w[0]);
    let ok = decreasing && res.len() >= 2 && res[0] >= factor * res[res.len() - 1];
    let _ = writeln!(pretty, "nonincreasing with a {factor}x overall drop: {}", pass_fail(ok));
    Ok(Report {
        json: envelope(
            "jalpha-residual",
            "C_{phi_alpha} is J_alpha-symmetric, so the residual vanishes as the truncation grows",
            *dims.last().unwrap_or(&cfg.dim),
            json!({ "decrease_factor": factor }),
            ok,
            json!({ "alpha": alpha, "rows": data }),
        ),
        table: Some(Table {
            header: vec!["dim", "working_dim", "residual", "unitarity", "involution"],
            rows,
        }),
        pretty,
    })
}

fn commutant(f: &Moebius, size: usize, cfg: ExperimentConfig) -> Result<Report> {
    let tol = cfg.tol.unwrap_or(1e-8);
    let d = commutant_dim(&comp_matrix(f, size)?, tol);
    let ok = d == 1;
    Ok(Report {
        json: envelope(
            "commutant-dim",
            "for an inner non-rotation symbol the conjugation is unique up to scalars; its shadow is a trivial commutant",
            size,
            json!({ "rank_rel_tol": tol, "expected": 1 }),
            ok,
            json!({ "input": f.to_string(), "commutant_dim": d }),
        ),
        table: Some(Table {
            header: vec!["size", "rank_rel_tol", "commutant_dim"],
            rows: vec![vec![size.to_string(), num(tol), d.to_string()]],
        }),
        pretty: format!("commutant of C_f for f = {f} at size {size}: dimension {d} (trivial: {})\n", pass_fail(ok)),
    })
}

fn elliptic(alpha: Complex64, order: u32, cfg: ExperimentConfig) -> Result<Report> {
    let p = Moebius::disk_involution(alpha)?;
    let r = Moebius::linear(root_of_unity(order))?;
    let f = p.compose(&r)?.compose(&p)?;
    let threshold = cfg.tol.unwrap_or(1e-8);
    let s = elliptic_sum(&f, cfg.dim)?;
    let ok = s.residual < threshold;
    Ok(Report {
        json: envelope(
            "elliptic-sum",
            "the sum T of the iterates of a finite-order elliptic automorphism satisfies T^2 = order T",
            cfg.dim,
            json!({ "residual_below": threshold }),
            ok,
            json!({
                "input": f.to_string(),
                "alpha": alpha,
                "order": s.order,
                "working_dim": s.op.working_dim(),
                "residual": s.residual,
            }),
        ),
        table: Some(Table {
            header: vec!["dim", "order", "working_dim", "residual"],
            rows: vec![vec![
                cfg.dim.to_string(),
                s.order.to_string(),
                s.op.working_dim().to_string(),
                num(s.residual),
            ]],
        }),
        pretty: format!(
            "f = {f} (order {}), N = {}: ||T^2 - {} T||_F / ||T||_F^2 = {:.3e} ({})\n",
            s.order,
            cfg.dim,
            s.order,
            s.residual,
            pass_fail(ok)
        ),
    })
}

/// e^{2 pi i / order}, exact for orders 1, 2 and 4.
fn root_of_unity(order: u32) -> Complex64 {
    match order {
        1 => Complex64::new(1.0, 0.0),
        2 => Complex64::new(-1.0, 0.0),
        4 => Complex64::new(0.0, 1.0),
        _ => Complex64::from_polar(1.0, TAU / order as f64),
    }
}

fn gram(f: &Moebius, step: f64, count: usize, target: f64, cfg: ExperimentConfig) -> Result<Report> {
    let grid: Vec<f64> = (1..=count).map(|k| step * k as f64).collect();
    let r = gram_minimality_experiment(f, &grid, target, cfg.dim)?;
    let (first, last) = (r.rows[0].distance, r.rows[r.rows.len() - 1].distance);
    let ok = r.nonincreasing && last < 0.5 * first;
    let rows = r
        .rows
        .iter()
        .map(|row| vec![row.m.to_string(), num(row.distance), num(row.gram_sigma_min)])
        .collect();
    let mut pretty = String::new();
    for row in &r.rows {
        let _ = writeln!(pretty, "m = {:>3}: distance {:.4e}, gram sigma_min {:.3e}", row.m, row.distance, row.gram_sigma_min);
    }
    let _ = writeln!(pretty, "{}", r.interpretation);
    Ok(Report {
        json: envelope(
            "parabolic-gram",
            "for a parabolic non-automorphism the eigenvectors psi_t are complete but not minimal",
            cfg.dim,
            json!({ "nonincreasing": true, "last_below_fraction_of_first": 0.5 }),
            ok,
            serde_json::to_value(&r)?,
        ),
        table: Some(Table {
            header: vec!["m", "distance", "gram_sigma_min"],
            rows,
        }),
        pretty,
    })
}

fn spiral(f: &Moebius, tmax: f64, steps: usize) -> Result<Report> {
    let steps = steps.max(1);
    let grid: Vec<f64> = (0..=steps).map(|k| tmax * k as f64 / steps as f64).collect();
    let eig = spectrum_spiral(f, &grid)?;
    let ok = eig.windows(2).all(|w| w[1].norm() < w[0].norm());
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&eig)
        .map(|(t, z)| vec![num(*t), num(z.re), num(z.im)])
        .collect();
    let points: Vec<Value> = grid.iter().zip(&eig).map(|(t, z)| json!({ "t": t, "eigenvalue": z })).collect();
    Ok(Report {
        json: envelope(
            "spectrum-spiral",
            "each e^{iat} is an eigenvalue and the moduli e^{-t Im a} strictly decrease",
            0,
            json!({ "strictly_decreasing_moduli": true }),
            ok,
            json!({ "input": f.to_string(), "tmax": tmax, "steps": steps, "points": points }),
        ),
        table: Some(Table {
            header: vec!["t", "re", "im"],
            rows,
        }),
        pretty: format!(
            "{} eigenvalues for t in [0, {tmax}]; last {:.4e}{:+.4e}i; moduli strictly decreasing: {}\n",
            eig.len(),
            eig[eig.len() - 1].re,
            eig[eig.len() - 1].im,
            pass_fail(ok)
        ),
    })
}

/// phi_alpha o (lambda w / (1 + c w)) o phi_alpha, attractive at alpha.
fn random_attractive(rng: &mut ChaCha8Rng) -> Result<Moebius> {
    let alpha = Complex64::from_polar(rng.random_range(0.0..0.6), rng.random_range(0.0..TAU));
    let lambda = Complex64::from_polar(rng.random_range(0.1..0.9), rng.random_range(0.0..TAU));
    let cmax = 0.9 * (1.0 - lambda.norm());
    let c = Complex64::from_polar(rng.random_range(0.0..cmax), rng.random_range(0.0..TAU));
    let inner = Moebius::new(lambda, Complex64::new(0.0, 0.0), c, Complex64::new(1.0, 0.0))?;
    let p = Moebius::disk_involution(alpha)?;
    Ok(p.compose(&inner)?.compose(&p)?)
}

fn koenigs_random(count: usize, cfg: ExperimentConfig) -> Result<Report> {
    let tol = cfg.tol.unwrap_or(1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut data = Vec::new();
    let mut ok = true;
    for _ in 0..count {
        let f = random_attractive(&mut rng)?;
        let chk = koenigs_check(&f, cfg.dim)?;
        ok &= chk.coefficient_gap < tol && chk.functional_residual < tol;
        rows.push(vec![
            f.to_string(),
            chk.depth.to_string(),
            num(chk.coefficient_gap),
            num(chk.functional_residual),
        ]);
        data.push(json!({
            "input": f.to_string(),
            "depth": chk.depth,
            "coefficient_gap": chk.coefficient_gap,
            "functional_residual": chk.functional_residual,
        }));
    }
    let worst = |key: &str| data.iter().map(|d| d[key].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    let pretty = format!(
        "{count} seeded maps (seed {}): worst coefficient gap {:.3e}, worst functional residual {:.3e} ({})\n",
        cfg.seed,
        worst("coefficient_gap"),
        worst("functional_residual"),
        pass_fail(ok)
    );
    Ok(Report {
        json: envelope(
            "koenigs-check",
            "the Koenigs eigenfunction solves kappa o f = lambda kappa and is the limit of normalized iterates",
            cfg.dim,
            json!({ "coefficient_gap_below": tol, "functional_residual_below": tol }),
            ok,
            json!({ "seed": cfg.seed, "maps": data }),
        ),
        table: Some(Table {
            header: vec!["map", "depth", "coefficient_gap", "functional_residual"],
            rows,
        }),
        pretty,
    })
}

fn orbit(f: &Moebius, steps: usize, cfg: ExperimentConfig) -> Result<Report> {
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sample = HardyVec::from_fn(cfg.dim, |k| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / (k as f64 + 1.0)
    });
    let r = orbit_projection_test(f, &sample, steps)?;
    let ok = r.max_deviation < tol;
    let rows = r
        .pairings
        .iter()
        .enumerate()
        .map(|(n, z)| vec![n.to_string(), num(z.re), num(z.im)])
        .collect();
    Ok(Report {
        json: envelope(
            "orbit-test",
            "C_f is not hypercyclic when f has an interior fixed point: orbits keep <K_alpha, T^n g> constant",
            cfg.dim,
            json!({ "max_deviation_below": tol }),
            ok,
            json!({ "input": f.to_string(), "seed": cfg.seed, "report": r }),
        ),
        table: Some(Table {
            header: vec!["n", "re", "im"],
            rows,
        }),
        pretty: format!("{}\n", r.conclusion),
    })
}
