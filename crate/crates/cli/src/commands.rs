use std::fmt::Write as _;

use anyhow::Result;
use hardylab_core::conjugations::{Conjugation, ConjugationKind};
use hardylab_core::eigensystems::koenigs_check;
use hardylab_core::moebius::{DiskMapClass, Moebius, SpherePoint};
use hardylab_core::operators::{comp_matrix, comp_section};
use hardylab_core::verdict::{decide_at, run_witness};
use serde_json::json;

use crate::output::{cnum, num, Report, Table};

fn describe_class(class: &DiskMapClass, out: &mut String) {
    let _ = writeln!(out, "kind:        {}", class.kind);
    let _ = writeln!(out, "multiplier:  {}", cnum(class.multiplier));
    if let Some(order) = class.order {
        let _ = writeln!(out, "order:       {}", serde_json::to_value(order).unwrap_or_default());
    }
    for fp in &class.fixed_points {
        let point = match fp.point {
            SpherePoint::Finite(z) => cnum(z),
            SpherePoint::Infinity => "infinity".into(),
        };
        let _ = writeln!(
            out,
            "fixed point: {point} (multiplier {}, multiplicity {})",
            cnum(fp.multiplier),
            fp.multiplicity
        );
    }
}

pub fn classify(f: &Moebius) -> Result<Report> {
    let class = f.classify()?;
    let mut pretty = format!("map:         {f}\n");
    describe_class(&class, &mut pretty);
    let rows = class
        .fixed_points
        .iter()
        .map(|fp| {
            let (re, im) = match fp.point {
                SpherePoint::Finite(z) => (num(z.re), num(z.im)),
                SpherePoint::Infinity => ("inf".into(), "inf".into()),
            };
            vec![
                class.kind.to_string(),
                re,
                im,
                num(fp.multiplier.re),
                num(fp.multiplier.im),
                fp.multiplicity.to_string(),
            ]
        })
        .collect();
    Ok(Report {
        json: json!({ "input": f.to_string(), "classification": class }),
        table: Some(Table {
            header: vec!["kind", "re", "im", "multiplier_re", "multiplier_im", "multiplicity"],
            rows,
        }),
        pretty,
    })
}

pub fn verdict(f: &Moebius, dim: usize, run: bool) -> Result<Report> {
    let v = decide_at(f, dim)?;
    let mut pretty = format!("map:         {f}\nverdict:     {:?}\nclaim:       {}\n", v.verdict, v.claim);
    describe_class(&v.classification, &mut pretty);
    let mut json = serde_json::to_value(&v)?;
    let mut rows = Vec::new();
    if run {
        let mut outcomes = Vec::new();
        for w in &v.witnesses {
            let o = run_witness(f, w)?;
            let name = serde_json::to_value(&w.op)?["op"].as_str().unwrap_or_default().to_string();
            let _ = writeln!(
                pretty,
                "witness:     {name} = {:.6e} ({}): {}",
                o.value,
                if o.passed { "as expected" } else { "NOT as expected" },
                w.expectation.text
            );
            rows.push(vec![name, num(o.value), o.passed.to_string()]);
            outcomes.push(json!({ "value": o.value, "passed": o.passed }));
        }
        json["outcomes"] = outcomes.into();
    } else {
        for w in &v.witnesses {
            let name = serde_json::to_value(&w.op)?["op"].as_str().unwrap_or_default().to_string();
            let _ = writeln!(pretty, "witness:     {name}: {}", w.expectation.text);
        }
    }
    Ok(Report {
        json,
        table: run.then(|| Table {
            header: vec!["witness", "value", "passed"],
            rows,
        }),
        pretty,
    })
}

pub fn matrix(f: &Moebius, dim: usize, section: bool) -> Result<Report> {
    let op = if section { comp_section(f, dim)? } else { comp_matrix(f, dim)? };
    let lead = op.section();
    let mut rows = Vec::with_capacity(dim * dim);
    let mut pretty = format!(
        "C_f for f = {f}, leading {dim}x{dim} block (working dimension {})\n",
        op.working_dim()
    );
    for i in 0..dim {
        let line: Vec<String> = (0..dim).map(|j| format!("{:>10.3e}", lead[(i, j)].re)).collect();
        let _ = writeln!(pretty, "{}", line.join(" "));
        for j in 0..dim {
            let z = lead[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                rows.push(vec![i.to_string(), j.to_string(), num(z.re), num(z.im)]);
            }
        }
    }
    Ok(Report {
        json: serde_json::to_value(&op)?,
        table: Some(Table {
            header: vec!["row", "col", "re", "im"],
            rows,
        }),
        pretty,
    })
}

fn conjugation_text(kind: ConjugationKind) -> String {
    match kind {
        ConjugationKind::Canonical => "canonical".into(),
        ConjugationKind::Rotation { theta } => format!("rotation, theta = {theta}"),
        ConjugationKind::JAlpha { alpha } => format!("J_alpha, alpha = {}", cnum(alpha)),
    }
}

pub fn csym(f: &Moebius, dim: usize, kind: ConjugationKind) -> Result<Report> {
    let c = Conjugation::build(kind, dim)?;
    let residual = c.csym_residual(&comp_section(f, dim)?)?;
    let axioms = c.axioms();
    let pretty = format!(
        "map:          {f}\nconjugation:  {}\ndim:          {dim} (working {})\nresidual:     {residual:.6e}\nunitarity:    {:.3e}\ninvolution:   {:.3e}\n",
        conjugation_text(kind),
        c.working_dim(),
        axioms.unitarity,
        axioms.involution
    );
    Ok(Report {
        json: json!({
            "input": f.to_string(),
            "conjugation": kind,
            "dim": dim,
            "working_dim": c.working_dim(),
            "residual": residual,
            "axioms": axioms,
        }),
        table: Some(Table {
            header: vec!["dim", "working_dim", "residual", "unitarity", "involution"],
            rows: vec![vec![
                dim.to_string(),
                c.working_dim().to_string(),
                num(residual),
                num(axioms.unitarity),
                num(axioms.involution),
            ]],
        }),
        pretty,
    })
}

pub fn koenigs(f: &Moebius, dim: usize) -> Result<Report> {
    let chk = koenigs_check(f, dim)?;
    let kd = &chk.closed_form;
    let pretty = format!(
        "map:                 {f}\nfixed point:         {}\nmultiplier:          {}\nkappa (as a map):    {}\niteration depth:     {}\ncoefficient gap:     {:.3e}\nfunctional residual: {:.3e}\n",
        cnum(kd.alpha),
        cnum(kd.lambda),
        kd.kappa_map,
        chk.depth,
        chk.coefficient_gap,
        chk.functional_residual
    );
    let rows = kd
        .kappa
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, z)| vec![k.to_string(), num(z.re), num(z.im)])
        .collect();
    Ok(Report {
        json: json!({
            "input": f.to_string(),
            "alpha": kd.alpha,
            "lambda": kd.lambda,
            "kappa_map": kd.kappa_map,
            "kappa": kd.kappa,
            "iteration_depth": chk.depth,
            "coefficient_gap": chk.coefficient_gap,
            "functional_residual": chk.functional_residual,
        }),
        table: Some(Table {
            header: vec!["k", "re", "im"],
            rows,
        }),
        pretty,
    })
}
