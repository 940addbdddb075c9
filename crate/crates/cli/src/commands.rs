use anyhow::{bail, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use recwalk::bounds::{evaluate_bounds, BoundOptions, BoundReport};
use recwalk::montecarlo::{simulate_tv, SimConfig};
use recwalk::recurrence::generate;
use recwalk::spectrum::compute_spectrum;
use recwalk::verify::{run_suites, select_suites, VerifyLimits};
use recwalk::walk::mixing_time;
use recwalk::Preset;

use crate::args::{
    BoundsArgs, GlobalArgs, MixArgs, SimulateArgs, SpectrumArgs, TableArgs, VerifyArgs,
};
use crate::manifest::{resolve_sequences, NamedSpec};
use crate::output::{opt, Artifact, Table};

/// What a command produced.
pub struct CommandOutput {
    pub sequences: Vec<NamedSpec>,
    pub artifact: Artifact,
    /// Set when a check the command ran did not hold.
    pub verification_failed: bool,
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("result".into(), other);
            map
        }
    }
}

fn single_sequence(global: &GlobalArgs) -> Result<NamedSpec> {
    let mut seqs = resolve_sequences(&global.seq, &[])?;
    match seqs.len() {
        1 => Ok(seqs.remove(0)),
        0 => bail!("this command needs exactly one --seq"),
        k => bail!("this command takes one --seq, got {k}"),
    }
}

pub fn table(global: &GlobalArgs, args: &TableArgs) -> Result<CommandOutput> {
    if args.n_max == 0 {
        bail!("--n-max must be at least 1");
    }
    let sequences = resolve_sequences(&global.seq, &Preset::ALL)?;
    let jobs: Vec<(usize, usize)> = (0..sequences.len())
        .flat_map(|s| (1..=args.n_max).map(move |n| (s, n)))
        .collect();
    let cells: Vec<(String, u64)> = jobs
        .par_iter()
        .map(|&(s, n)| -> Result<(String, u64)> {
            let window = generate(&sequences[s].spec, n)?;
            let t = mixing_time(&window, global.epsilon.value, global.nmax_states)?.t_mix;
            Ok((window.modulus().to_string(), t))
        })
        .collect::<Result<_>>()?;

    let mut header = vec!["n".to_string()];
    for seq in &sequences {
        header.push(format!("{}_G_n", seq.id));
        header.push(format!("{}_t_mix", seq.id));
    }
    let mut table = Table::new(header);
    for n in 1..=args.n_max {
        let mut row = vec![n.to_string()];
        for s in 0..sequences.len() {
            let (g, t) = &cells[s * args.n_max + n - 1];
            row.push(g.clone());
            row.push(t.to_string());
        }
        table.push(row);
    }
    let json_seqs: Vec<Value> = sequences
        .iter()
        .enumerate()
        .map(|(s, seq)| {
            let rows: Vec<Value> = (1..=args.n_max)
                .map(|n| {
                    let (g, t) = &cells[s * args.n_max + n - 1];
                    json!({ "n": n, "G_n": g, "t_mix": t })
                })
                .collect();
            json!({ "id": seq.id, "spec": seq.spec, "rows": rows })
        })
        .collect();
    let body = json!({ "epsilon": global.epsilon.text, "sequences": json_seqs });
    Ok(CommandOutput {
        sequences,
        artifact: Artifact {
            json: object(body),
            table,
        },
        verification_failed: false,
    })
}

pub fn spectrum(global: &GlobalArgs, args: &SpectrumArgs) -> Result<CommandOutput> {
    let seq = single_sequence(global)?;
    let window = generate(&seq.spec, args.n)?;
    let spectrum = compute_spectrum(&window, global.nmax_states)?;
    let entries: Vec<(u64, f64, f64)> = match args.top {
        Some(top) => spectrum
            .top_by_modulus(top)
            .into_iter()
            .map(|(k, z)| (k, z.re, z.im))
            .collect(),
        None => spectrum
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(i, z)| (i as u64 + 1, z.re, z.im))
            .collect(),
    };
    let mut table = Table::new(["k", "re", "im", "modulus"]);
    let mut list = Vec::with_capacity(entries.len());
    for &(k, re, im) in &entries {
        let modulus = re.hypot(im);
        table.push(vec![
            k.to_string(),
            re.to_string(),
            im.to_string(),
            modulus.to_string(),
        ]);
        list.push(json!({ "k": k, "re": re, "im": im, "modulus": modulus }));
    }
    let body = json!({
        "sequence": seq.id,
        "n": args.n,
        "states": spectrum.modulus(),
        "slem": spectrum.slem().ok(),
        "eigenvalues": list,
    });
    Ok(CommandOutput {
        sequences: vec![seq],
        artifact: Artifact {
            json: object(body),
            table,
        },
        verification_failed: false,
    })
}

pub fn mix(global: &GlobalArgs, args: &MixArgs) -> Result<CommandOutput> {
    let seq = single_sequence(global)?;
    let window = generate(&seq.spec, args.n)?;
    let result = mixing_time(&window, global.epsilon.value, global.nmax_states)?;
    let mut table = Table::new(["t", "tv"]);
    for &(t, tv) in &result.tv_curve {
        table.push(vec![t.to_string(), tv.to_string()]);
    }
    let body = json!({ "sequence": seq.id, "mixing": result });
    Ok(CommandOutput {
        sequences: vec![seq],
        artifact: Artifact {
            json: object(body),
            table,
        },
        verification_failed: false,
    })
}

const BOUND_COLUMNS: [&str; 21] = [
    "sequence",
    "n",
    "states",
    "epsilon",
    "s",
    "kappa_general",
    "upper_general",
    "eta1",
    "gamma_general",
    "m_of_n",
    "lower_general",
    "c",
    "kappa_first_order",
    "upper_first_order",
    "gamma_first_order",
    "lower_first_order",
    "slem",
    "relaxation_lower",
    "ubl_implied_t",
    "exact_t_mix",
    "violations",
];

fn bound_row(r: &BoundReport, violations: &[String]) -> Vec<String> {
    vec![
        r.sequence.clone(),
        r.n.to_string(),
        r.states.clone(),
        r.epsilon.to_string(),
        r.s.to_string(),
        r.kappa_general.to_string(),
        r.upper_general.to_string(),
        opt(r.eta1),
        opt(r.gamma_general),
        r.m_of_n.to_string(),
        opt(r.lower_general),
        opt(r.c),
        opt(r.kappa_first_order),
        opt(r.upper_first_order),
        opt(r.gamma_first_order),
        opt(r.lower_first_order),
        r.slem.to_string(),
        r.relaxation_lower.to_string(),
        opt(r.ubl_implied_t),
        opt(r.exact_t_mix),
        violations.join("; "),
    ]
}

pub fn bounds(global: &GlobalArgs, args: &BoundsArgs) -> Result<CommandOutput> {
    let sequences = resolve_sequences(&global.seq, &Preset::ALL)?;
    let (lo, hi) = match args.n {
        Some(n) => (n, n),
        None => (args.n_min, args.n_max),
    };
    if lo > hi {
        bail!("--n-min {lo} exceeds --n-max {hi}");
    }
    let opts = BoundOptions {
        eta1: global.eta1,
        gamma: args.gamma,
        max_states: global.nmax_states,
    };
    let jobs: Vec<(usize, usize)> = (0..sequences.len())
        .flat_map(|s| (lo..=hi).map(move |n| (s, n)))
        .collect();
    let reports: Vec<BoundReport> = jobs
        .par_iter()
        .map(|&(s, n)| -> Result<BoundReport> {
            let seq = &sequences[s];
            let window = generate(&seq.spec, n)?;
            Ok(evaluate_bounds(
                &window,
                &seq.id,
                global.epsilon.value,
                &opts,
            )?)
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(BOUND_COLUMNS);
    let mut list = Vec::with_capacity(reports.len());
    let mut failed = false;
    for r in &reports {
        let violations = r.violations();
        failed |= !violations.is_empty();
        table.push(bound_row(r, &violations));
        let mut entry = object(serde_json::to_value(r)?);
        entry.insert("violations".into(), json!(violations));
        list.push(Value::Object(entry));
    }
    let body = json!({ "epsilon": global.epsilon.text, "reports": list });
    Ok(CommandOutput {
        sequences,
        artifact: Artifact {
            json: object(body),
            table,
        },
        verification_failed: failed,
    })
}

pub fn verify(global: &GlobalArgs, args: &VerifyArgs) -> Result<CommandOutput> {
    let suites = select_suites(&args.suite)?;
    let sequences = resolve_sequences(&global.seq, &Preset::ALL)?;
    let limits = VerifyLimits {
        sequences: sequences
            .iter()
            .map(|s| (s.id.clone(), s.spec.clone()))
            .collect(),
        n_min: args.n_min,
        n_max: args.n_max,
        max_states: global.nmax_states,
        epsilon: global.epsilon.value,
        lift_cap: args.lift_cap,
        domination_cap: args.domination_cap,
        ..VerifyLimits::default()
    };
    let reports = run_suites(&suites, &limits)?;
    let passed = reports.iter().all(|r| r.passed);
    let mut table = Table::new([
        "suite",
        "passed",
        "cases",
        "worst_slack",
        "worst_case",
        "tolerance",
    ]);
    for r in &reports {
        table.push(vec![
            r.suite.to_string(),
            r.passed.to_string(),
            r.cases.to_string(),
            r.worst_slack.to_string(),
            r.worst_case.clone(),
            r.tolerance.to_string(),
        ]);
    }
    let body = json!({ "passed": passed, "suites": reports });
    Ok(CommandOutput {
        sequences,
        artifact: Artifact {
            json: object(body),
            table,
        },
        verification_failed: !passed,
    })
}

pub fn simulate(global: &GlobalArgs, args: &SimulateArgs) -> Result<CommandOutput> {
    let seq = single_sequence(global)?;
    let window = generate(&seq.spec, args.n)?;
    let config = SimConfig::new(&window, args.t_max, args.trajectories, global.seed)?;
    let curve = simulate_tv(&config);
    let mut table = Table::new(["t", "empirical_tv", "num_trajectories", "seed"]);
    let mut list = Vec::with_capacity(curve.len());
    for &(t, tv) in &curve {
        table.push(vec![
            t.to_string(),
            tv.to_string(),
            args.trajectories.to_string(),
            global.seed.to_string(),
        ]);
        list.push(json!({ "t": t, "empirical_tv": tv }));
    }
    let body = json!({
        "sequence": seq.id,
        "n": args.n,
        "states": window.modulus().to_string(),
        "num_trajectories": args.trajectories,
        "seed": global.seed,
        "curve": list,
    });
    Ok(CommandOutput {
        sequences: vec![seq],
        artifact: Artifact {
            json: object(body),
            table,
        },
        verification_failed: false,
    })
}
