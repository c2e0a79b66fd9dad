use anyhow::{Context, Result};
use asymqkd_core::distill::modified_rate_one_bstep;
use asymqkd_core::keyrates::{
    rate_bb84_symmetrized, rate_single_basis, rate_sixstate_mixed, rate_sixstate_separate,
};
use asymqkd_core::sim::{compare_analytic, run_protocol, ProtocolParams, SimReport, Verdict};
use asymqkd_core::threshold::{sweep_fig1, threshold_total_noise, Evidence, SearchParams};
use asymqkd_core::Basis;

use crate::args::{Fig1Args, Fig2Args, RatesArgs, SimFormat, SimulateArgs, ThresholdArgs};
use crate::fig2;
use crate::output::{channel_config, fx, Document};

const EQUAL_WITHIN: f64 = 1e-10;

fn relation(a: f64, name: &str, b: f64) -> String {
    if (a - b).abs() <= EQUAL_WITHIN {
        format!("= {name}")
    } else if a > b {
        format!("> {name}")
    } else {
        format!("< {name}")
    }
}

pub fn rates(args: &RatesArgs) -> Result<String> {
    let ch = args.channel.resolve()?;
    let f = ch.flip_rates();
    let bb84 = rate_bb84_symmetrized(&ch).value();
    let single = rate_single_basis(&ch).value();
    let mixed = rate_sixstate_mixed(&ch).value();
    let separate = rate_sixstate_separate(&ch).value();
    let two_way = modified_rate_one_bstep(&ch.conjugate(Basis::Y)).value();

    let mut doc = Document::new("rates", &channel_config(&ch), None);
    let rows: Vec<[String; 3]> = vec![
        ["quantity".into(), "value".into(), "relation".into()],
        ["p_x0".into(), fx(f.p_x), String::new()],
        ["p_z0".into(), fx(f.p_z), String::new()],
        ["p_y0".into(), fx(f.p_y), String::new()],
        ["rate_bb84_symmetrized".into(), fx(bb84), String::new()],
        [
            "rate_single_basis".into(),
            fx(single),
            relation(single, "rate_bb84_symmetrized", bb84),
        ],
        ["rate_sixstate_mixed".into(), fx(mixed), String::new()],
        [
            "rate_sixstate_separate".into(),
            fx(separate),
            relation(separate, "rate_sixstate_mixed", mixed),
        ],
        [
            "r_prime".into(),
            fx(separate),
            relation(separate, "rate_sixstate_mixed", mixed),
        ],
        [
            "R_one_bstep_ybasis".into(),
            fx(two_way),
            relation(two_way, "r_prime", separate),
        ],
    ];
    doc.csv(rows);
    Ok(doc.finish())
}

fn search_params(d: &crate::args::DistillArgs) -> SearchParams {
    SearchParams {
        distill: d.params(),
        tol: d.tol,
        ..SearchParams::default()
    }
}

pub fn threshold(args: &ThresholdArgs) -> Result<String> {
    let family = args.family()?;
    let dir = family.unit_direction();
    let config = format!(
        "variant={} direction={},{},{} {}",
        args.variant,
        fx(dir[0]),
        fx(dir[1]),
        fx(dir[2]),
        args.distill.describe()
    );
    let res = threshold_total_noise(&family, args.variant, &search_params(&args.distill))
        .with_context(|| format!("threshold search for {}", args.variant))?;

    let (b_steps, k, rate, survival) = match &res.at_threshold.evidence {
        Evidence::TwoWay(t) => (
            t.m().to_string(),
            t.k().to_string(),
            fx(t.final_css_rate),
            fx(t.cumulative_survival),
        ),
        Evidence::OneWay(r) => ("NA".into(), "NA".into(), fx(r.value()), "NA".into()),
    };
    let mut doc = Document::new("threshold", &config, None);
    doc.csv([
        [
            "variant",
            "Q_t0",
            "bracket_lo",
            "bracket_hi",
            "b_steps",
            "p_step_k",
            "final_rate",
            "survival",
        ]
        .map(String::from),
        [
            args.variant.to_string(),
            fx(res.q_t0_threshold),
            fx(res.bracket.0),
            fx(res.bracket.1),
            b_steps,
            k,
            rate,
            survival,
        ],
    ]);
    Ok(doc.finish())
}

pub fn sweep_fig1_cmd(args: &Fig1Args) -> Result<String> {
    let grid = args.grid.points();
    let rows = sweep_fig1(&grid, &search_params(&args.distill));
    let config = format!("grid={} {}", args.grid.text, args.distill.describe());
    let mut doc = Document::new("sweep-fig1", &config, None);

    let mut table = vec![["q_y0_over_q_x0", "q_y0", "Q_t0_ybasis", "Q_t0_chau"].map(String::from)];
    for (i, row) in rows.iter().enumerate() {
        for (name, r) in [("ybasis", &row.ybasis), ("chau", &row.chau)] {
            if let Err(e) = r {
                doc.comment(&format!("row {i} {name}: {e}"));
            }
        }
        let q = |r: &asymqkd_core::Result<asymqkd_core::ThresholdResult>| {
            r.as_ref().map_or(f64::NAN, |t| t.q_t0_threshold)
        };
        table.push([
            fx(row.y_fraction),
            fx(row.q_y0().unwrap_or(f64::NAN)),
            fx(q(&row.ybasis)),
            fx(q(&row.chau)),
        ]);
    }
    doc.csv(table);
    Ok(doc.finish())
}

pub fn sweep_fig2_cmd(args: &Fig2Args) -> Result<String> {
    let cases: Vec<String> = args.cases.iter().map(|&c| fx(c)).collect();
    let config = format!(
        "grid={} cases={} q_x0=q_z0 key_basis=Y",
        args.grid.text,
        cases.join(",")
    );
    let mut doc = Document::new(
        if args.crossings {
            "sweep-fig2 crossings"
        } else {
            "sweep-fig2"
        },
        &config,
        None,
    );

    if args.crossings {
        let mut table = vec![[
            "case",
            "q_y0",
            "R_exceeds_r_prime_from",
            "r_prime_zero",
            "R_zero",
        ]
        .map(String::from)];
        for (i, &q_y0) in args.cases.iter().enumerate() {
            let c = fig2::crossings(q_y0)?;
            let opt = |v: Option<f64>| fx(v.unwrap_or(f64::NAN));
            table.push([
                fig2::case_label(i),
                fx(q_y0),
                opt(c.crossing),
                opt(c.r_prime_zero),
                opt(c.r_zero),
            ]);
        }
        doc.csv(table);
        return Ok(doc.finish());
    }

    let mut table = vec![["case", "q_y0", "total_noise", "r_prime", "R"].map(String::from)];
    for (i, &q_y0) in args.cases.iter().enumerate() {
        for total in args.grid.points() {
            let (rp, r) = fig2::rates(q_y0, total).unwrap_or((f64::NAN, f64::NAN));
            table.push([fig2::case_label(i), fx(q_y0), fx(total), fx(rp), fx(r)]);
        }
    }
    doc.csv(table);
    Ok(doc.finish())
}

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    let ch = args.channel.resolve()?;
    let params = ProtocolParams {
        n: args.n,
        delta: args.delta,
        target: args.target,
        b_rounds: args.b_rounds,
        p_group: args.k,
        abort_sigma: args.abort_sigma,
        abort_ceiling: args.abort_ceiling,
        check_split: args.check_split.split(),
        ..ProtocolParams::default()
    };
    let report = run_protocol(&ch, &params, args.seed, args.eve.model.as_ref())?;
    let verdict = compare_analytic(&report, args.z_max);
    let config = format!(
        "{} n={} delta={} eve={} b_rounds={} k={} target={} abort_sigma={} abort_ceiling={} check_split={:?} z_max={} format={:?}",
        channel_config(&ch),
        args.n,
        args.delta,
        args.eve.text,
        args.b_rounds,
        args.k,
        args.target,
        args.abort_sigma,
        args.abort_ceiling,
        args.check_split,
        args.z_max,
        args.format,
    )
    .to_lowercase();
    let mut doc = Document::new("simulate", &config, Some(args.seed));
    match args.format {
        SimFormat::Kv => write_kv(&mut doc, &report, &verdict),
        SimFormat::Csv => write_stage_csv(&mut doc, &report, &verdict),
    }
    Ok(doc.finish())
}

fn abort_text(report: &SimReport) -> String {
    report
        .abort
        .map_or_else(|| "none".into(), |a| a.to_string())
}

fn write_kv(doc: &mut Document, r: &SimReport, v: &Verdict) {
    let mut kv = |k: &str, v: String| doc.line(&format!("{k}={v}"));
    kv("seed", r.seed.to_string());
    kv("transmissions", r.transmissions.to_string());
    kv("sifted", r.sifted.to_string());
    kv(
        "sift_fraction",
        fx(r.sifted as f64 / r.transmissions as f64),
    );
    kv("sift_fraction.analytic", fx(r.sift_probability));
    for c in &r.checks {
        let p = format!("check.{}", c.basis);
        kv(&format!("{p}.prepared"), c.prepared.to_string());
        kv(&format!("{p}.sifted"), c.sifted.to_string());
        kv(&format!("{p}.checked"), c.checked.to_string());
        kv(&format!("{p}.errors"), c.errors.to_string());
        kv(&format!("{p}.rate"), fx(c.empirical()));
        kv(&format!("{p}.std_error"), fx(c.std_error()));
        kv(&format!("{p}.expected"), fx(c.expected));
        kv(&format!("{p}.analytic"), fx(c.analytic));
        kv(&format!("{p}.abort_limit"), fx(c.abort_limit(&r.params)));
    }
    kv("key_bits", r.key_bits.to_string());
    kv("aborted", r.aborted().to_string());
    kv("abort_reason", abort_text(r));
    for s in &r.stages {
        let p = format!("stage.{}", s.kind);
        kv(&format!("{p}.input"), s.input.to_string());
        kv(&format!("{p}.trials"), s.trials.to_string());
        kv(&format!("{p}.kept"), s.kept.to_string());
        kv(&format!("{p}.discarded"), s.discarded.to_string());
        kv(&format!("{p}.p_x"), fx(s.p_x()));
        kv(&format!("{p}.p_x.analytic"), fx(s.analytic.p_x));
        kv(&format!("{p}.p_z"), fx(s.p_z()));
        kv(&format!("{p}.p_z.analytic"), fx(s.analytic.p_z));
    }
    if let (Some(e), Some(a)) = (r.final_rate_empirical, r.final_rate_analytic) {
        kv("final_rate", fx(e));
        kv("final_rate.analytic", fx(a));
    }
    if let Some(m) = r.meets_target() {
        kv("meets_target", m.to_string());
    }
    for row in &v.rows {
        kv(
            &format!("compare.{}", row.label),
            format!("{} {} z={}", fx(row.empirical), fx(row.analytic), fx(row.z)),
        );
    }
    kv("verdict", if v.pass { "PASS" } else { "FAIL" }.into());
}

fn write_stage_csv(doc: &mut Document, r: &SimReport, v: &Verdict) {
    doc.comment(&format!("aborted={} reason={}", r.aborted(), abort_text(r)));
    doc.comment(&format!("verdict={}", if v.pass { "PASS" } else { "FAIL" }));
    let mut table = vec![[
        "stage",
        "input",
        "kept",
        "discarded",
        "error",
        "error_analytic",
        "phase_error",
        "phase_error_analytic",
    ]
    .map(String::from)];
    for c in &r.checks {
        // Sifted bits left over once the key bits are taken.
        let pool = if c.basis == Basis::Y {
            c.sifted.saturating_sub(r.key_bits)
        } else {
            c.sifted
        };
        table.push([
            format!("check.{}", c.basis),
            pool.to_string(),
            c.checked.to_string(),
            (pool - c.checked).to_string(),
            fx(c.empirical()),
            fx(c.analytic),
            "NA".into(),
            "NA".into(),
        ]);
    }
    for s in &r.stages {
        table.push([
            s.kind.to_string(),
            s.input.to_string(),
            s.kept.to_string(),
            s.discarded.to_string(),
            fx(s.p_x()),
            fx(s.analytic.p_x),
            fx(s.p_z()),
            fx(s.analytic.p_z),
        ]);
    }
    doc.csv(table);
}
