use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::{json, Value};

use phaselab::classical::{default_eta_grid, phase_generator};
use phaselab::disk::{disk_entries, disk_error_sweep, DiskError};
use phaselab::equidist::{
    default_harmonic_count, discrepancy, erdos_turan_bound, CircleEnsemble,
};
use phaselab::fit::fit_rate;
use phaselab::potential::{
    check_angle_condition, check_nontrapping, interaction_region, CentralPotential,
};
use phaselab::radial::{
    build_table_with_profile, circle_distance, default_l_max, entry_flags, order_of,
    wkb_eigenvalue, EntryFlags, TableOptions,
};
use phaselab::specfun::selftest_table;

use crate::output::{self, CliError};
use crate::{Cli, Command, Format, OutputArgs, PotentialArgs, TableArgs};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx { seed: cli.seed, timestamp: cli.timestamp };
    match cli.command {
        Command::Classical { potential, grid, output } => {
            run_classical(&ctx, &potential, grid, &output)
        }
        Command::Phaseshifts { potential, table, r_match, output } => {
            run_phaseshifts(&ctx, &potential, &table, r_match, &output)
        }
        Command::Wkb { potential, table, output } => run_wkb(&ctx, &potential, &table, &output),
        Command::Disk { dim, radius, k_list, alpha_max, output } => {
            run_disk(&ctx, dim, radius, &k_list, alpha_max, &output)
        }
        Command::Discrepancy { input, from_table, alpha_max, et_harmonics, output } => {
            run_discrepancy(&ctx, input, from_table, alpha_max, et_harmonics, &output)
        }
        Command::Sweep { potential, table, output } => run_sweep(&ctx, &potential, &table, &output),
        Command::CheckPotential { potential, output } => {
            run_check_potential(&ctx, &potential, &output)
        }
        Command::SpecfunSelftest { output } => run_specfun_selftest(&ctx, &output),
    }
}

struct Ctx {
    seed: u64,
    timestamp: bool,
}

impl Ctx {
    /// Sorted-key metadata object; the timestamp is opt-in so that default
    /// runs stay byte-reproducible.
    fn metadata(&self, extra: Value) -> Value {
        let Value::Object(mut m) = extra else { unreachable!("metadata extras are objects") };
        m.insert("seed".into(), self.seed.into());
        if self.timestamp {
            let t = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            m.insert("unix_time".into(), t.into());
        }
        Value::Object(m)
    }
}

struct Scaled {
    /// Potential exactly as specified, echoed into metadata.
    given: CentralPotential,
    /// Amplitude-rescaled to unit energy.
    potential: CentralPotential,
    energy: f64,
}

impl Scaled {
    fn h(&self, h_input: f64) -> f64 {
        h_input / self.energy.sqrt()
    }
}

fn load_potential(args: &PotentialArgs) -> Result<Scaled, CliError> {
    if !(args.energy > 0.0 && args.energy.is_finite()) {
        return Err(CliError::Config(format!("--energy must be positive, got {}", args.energy)));
    }
    let text = args.potential.trim();
    let given = if text.starts_with('{') {
        CentralPotential::from_json_str(text)?
    } else {
        CentralPotential::from_path(std::path::Path::new(text))?
    };
    let potential = given.scaled_amplitude(1.0 / args.energy);
    Ok(Scaled { given, potential, energy: args.energy })
}

fn validate_dim(d: u32) -> Result<(), CliError> {
    if (2..=9).contains(&d) {
        Ok(())
    } else {
        Err(CliError::Config(format!("--dim must be between 2 and 9, got {d}")))
    }
}

fn validate_list(name: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.is_empty() || xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(CliError::Config(format!("{name} must be a list of positive reals")));
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn fmt_flags(f: &EntryFlags) -> String {
    let mut parts = Vec::new();
    if f.bad_set {
        parts.push("bad-set");
    }
    if f.large_l {
        parts.push("large-l");
    }
    if f.stiff {
        parts.push("stiff");
    }
    parts.join(";")
}

fn any_flag(f: &EntryFlags) -> bool {
    f.bad_set || f.large_l || f.stiff
}

fn plots_need_csv(out_args: &OutputArgs) -> Result<(), CliError> {
    if out_args.plots && out_args.format == Format::Json {
        return Err(CliError::Config("--plots requires --format csv".into()));
    }
    Ok(())
}

const TOLERANCES: (&str, f64, &str, f64, &str, f64) =
    ("ode_rtol", 1e-10, "ode_atol", 1e-12, "quad_tol", 1e-10);

fn tolerance_block() -> Value {
    let (a, av, b, bv, c, cv) = TOLERANCES;
    json!({ a: av, b: bv, c: cv })
}

fn run_classical(
    ctx: &Ctx,
    pot_args: &PotentialArgs,
    grid: usize,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    plots_need_csv(out_args)?;
    if grid < 8 {
        return Err(CliError::Config("--grid must be at least 8".into()));
    }
    let s = load_potential(pot_args)?;
    let radius = s.potential.support_radius();
    let eta = if grid == 512 {
        default_eta_grid(radius)
    } else {
        linspace(1e-3 * radius, radius, grid)
    };
    let profile = phase_generator(&s.potential, &eta)?;
    let bad = profile.bad_set();
    let n = profile.eta_grid().len();

    let content = match out_args.format {
        Format::Csv => {
            let mut csv = String::from("eta,sigma,T,G\n");
            for i in 0..n {
                writeln!(
                    csv,
                    "{},{},{},{}",
                    profile.eta_grid()[i],
                    profile.sigma_values()[i],
                    profile.delay_values()[i],
                    profile.g_values()[i]
                )
                .unwrap();
            }
            csv
        }
        Format::Json => {
            let rows: Vec<Value> = (0..n)
                .map(|i| {
                    json!({
                        "eta": profile.eta_grid()[i],
                        "sigma": profile.sigma_values()[i],
                        "T": profile.delay_values()[i],
                        "G": profile.g_values()[i],
                    })
                })
                .collect();
            output::json_document(
                "classical",
                ctx.metadata(json!({
                    "potential": s.given,
                    "energy": s.energy,
                    "grid": n,
                    "bad_set": bad,
                    "tolerances": tolerance_block(),
                })),
                "rows",
                Value::Array(rows),
            )
        }
    };
    output::write_data(&out_args.out, &content)?;
    if out_args.plots {
        output::write_plot_script(&out_args.out, |data| {
            format!(
                "set xlabel 'eta'\n\
                 plot '{data}' using 1:2 with lines title 'Sigma', \\\n     \
                 '' using 1:3 with lines title 'T', \\\n     \
                 '' using 1:4 with lines title 'G'\n"
            )
        })?;
    }
    let sigma_min = profile.sigma_values().iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = profile.delay_values().iter().cloned().fold(0.0, f64::max);
    output::summarize(
        &out_args.out,
        &format!(
            "classical: {n} points on (0, {radius}], sigma_min={sigma_min:.6}, \
             T_max={t_max:.6}, bad_set={bad:?}"
        ),
    );
    Ok(())
}

fn run_phaseshifts(
    ctx: &Ctx,
    pot_args: &PotentialArgs,
    t: &TableArgs,
    r_match: Option<f64>,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    plots_need_csv(out_args)?;
    validate_dim(t.dim)?;
    validate_list("--h", &t.h_list)?;
    let s = load_potential(pot_args)?;
    let radius = s.potential.support_radius();
    let profile = phase_generator(&s.potential, &default_eta_grid(radius))?;
    let opts = TableOptions { epsilon: t.epsilon, kappa: t.kappa, r_match };

    let mut tables = Vec::with_capacity(t.h_list.len());
    for &h_in in &t.h_list {
        let h = s.h(h_in);
        let l_max = t.lmax.unwrap_or_else(|| default_l_max(radius, h));
        tables.push(build_table_with_profile(&s.potential, &profile, t.dim, h, l_max, &opts)?);
    }

    let content = match out_args.format {
        Format::Csv => {
            let mut csv = String::from("d,l,h,nu,multiplicity,beta_exact,beta_wkb,abs_err,flags\n");
            for tb in &tables {
                for e in &tb.entries {
                    writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{}",
                        tb.d,
                        e.l,
                        tb.h,
                        e.nu,
                        e.multiplicity,
                        e.beta_exact,
                        e.beta_wkb,
                        circle_distance(e.beta_exact, e.beta_wkb),
                        fmt_flags(&e.flags)
                    )
                    .unwrap();
                }
            }
            csv
        }
        Format::Json => output::json_document(
            "phaseshifts",
            ctx.metadata(json!({
                "potential": s.given,
                "energy": s.energy,
                "d": t.dim,
                "h_input": t.h_list,
                "epsilon": t.epsilon,
                "kappa": t.kappa,
                "tolerances": tolerance_block(),
            })),
            "tables",
            serde_json::to_value(&tables).expect("tables serialize"),
        ),
    };
    output::write_data(&out_args.out, &content)?;

    let parts: Vec<String> = tables
        .iter()
        .map(|tb| {
            let mut max_err = 0.0_f64;
            let mut flagged = 0usize;
            for e in &tb.entries {
                if any_flag(&e.flags) {
                    flagged += 1;
                } else {
                    max_err = max_err.max(circle_distance(e.beta_exact, e.beta_wkb));
                }
            }
            format!("h={}: n={}, max|exact-wkb|={max_err:.3e}, flagged={flagged}", tb.h, tb.entries.len())
        })
        .collect();
    output::summarize(&out_args.out, &format!("phaseshifts d={}: {}", t.dim, parts.join("; ")));
    Ok(())
}

fn run_wkb(
    ctx: &Ctx,
    pot_args: &PotentialArgs,
    t: &TableArgs,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    plots_need_csv(out_args)?;
    validate_dim(t.dim)?;
    validate_list("--h", &t.h_list)?;
    let s = load_potential(pot_args)?;
    let radius = s.potential.support_radius();
    let profile = phase_generator(&s.potential, &default_eta_grid(radius))?;
    let bad = profile.bad_set();
    let opts = TableOptions { epsilon: t.epsilon, kappa: t.kappa, r_match: None };

    let mut rows: Vec<(f64, u32, f64, f64, u64, f64, EntryFlags)> = Vec::new();
    for &h_in in &t.h_list {
        let h = s.h(h_in);
        let l_max = t.lmax.unwrap_or_else(|| default_l_max(radius, h));
        for l in 0..=l_max {
            let nu = order_of(t.dim, l);
            let alpha = nu * h;
            let (_, beta) = wkb_eigenvalue(&profile, t.dim, l, h);
            let flags = entry_flags(&bad, radius, alpha, h, &opts);
            rows.push((h, l, nu, alpha, phaselab::spherical_harmonic_dim(t.dim, l), beta, flags));
        }
    }

    let content = match out_args.format {
        Format::Csv => {
            let mut csv = String::from("d,l,h,nu,alpha,multiplicity,beta_wkb,flags\n");
            for (h, l, nu, alpha, mult, beta, flags) in &rows {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    t.dim, l, h, nu, alpha, mult, beta, fmt_flags(flags)
                )
                .unwrap();
            }
            csv
        }
        Format::Json => {
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|(h, l, nu, alpha, mult, beta, flags)| {
                    json!({
                        "d": t.dim, "l": l, "h": h, "nu": nu, "alpha": alpha,
                        "multiplicity": mult, "beta_wkb": beta,
                        "flags": serde_json::to_value(flags).unwrap(),
                    })
                })
                .collect();
            output::json_document(
                "wkb",
                ctx.metadata(json!({
                    "potential": s.given,
                    "energy": s.energy,
                    "d": t.dim,
                    "h_input": t.h_list,
                    "epsilon": t.epsilon,
                    "kappa": t.kappa,
                })),
                "rows",
                Value::Array(json_rows),
            )
        }
    };
    output::write_data(&out_args.out, &content)?;
    output::summarize(
        &out_args.out,
        &format!("wkb d={}: {} phases across {} values of h", t.dim, rows.len(), t.h_list.len()),
    );
    Ok(())
}

fn run_disk(
    ctx: &Ctx,
    dim: u32,
    radius: f64,
    k_list: &[f64],
    alpha_max: Option<f64>,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    plots_need_csv(out_args)?;
    validate_dim(dim)?;
    validate_list("--k", k_list)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Config(format!("--radius must be positive, got {radius}")));
    }
    let amax = alpha_max.unwrap_or(radius);
    if !(amax > 0.0) {
        return Err(CliError::Config(format!("--alpha-max must be positive, got {amax}")));
    }

    let mut per_k = Vec::with_capacity(k_list.len());
    for &k in k_list {
        per_k.push((k, disk_entries(dim, k, radius, amax)?));
    }
    let sweep = if k_list.len() >= 3 {
        match disk_error_sweep(dim, radius, k_list) {
            Ok(sw) => Some(sw),
            Err(DiskError::Domain(_)) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let content = match out_args.format {
        Format::Csv => {
            let mut csv = String::from("d,l,k,R,multiplicity,x_exact,x_approx,abs_err,in_range\n");
            for (k, entries) in &per_k {
                let window = radius - k.powf(-1.0 / 3.0);
                for e in entries {
                    writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{}",
                        dim,
                        e.l,
                        k,
                        radius,
                        e.multiplicity,
                        e.x_exact,
                        e.x_approx,
                        e.err,
                        u8::from(e.alpha <= window)
                    )
                    .unwrap();
                }
            }
            csv
        }
        Format::Json => {
            let blocks: Vec<Value> = per_k
                .iter()
                .map(|(k, entries)| {
                    json!({ "k": k, "entries": serde_json::to_value(entries).unwrap() })
                })
                .collect();
            output::json_document(
                "disk",
                ctx.metadata(json!({
                    "d": dim, "radius": radius, "k_list": k_list, "alpha_max": amax,
                })),
                "results",
                json!({
                    "by_k": blocks,
                    "sweep": sweep.as_ref().map(|sw| serde_json::to_value(sw).unwrap()),
                }),
            )
        }
    };
    output::write_data(&out_args.out, &content)?;
    if out_args.plots {
        let shift = (dim as f64 - 2.0) / 2.0;
        output::write_plot_script(&out_args.out, |data| {
            format!(
                "set xlabel 'alpha'\nset ylabel 'eigenvalue error'\nset logscale y\n\
                 plot '{data}' using (($2+{shift})/$3):8 with points title 'exact vs geometric'\n"
            )
        })?;
    }

    let mut summary = format!("disk d={dim} R={radius}: ");
    let sups: Vec<String> = per_k
        .iter()
        .map(|(k, entries)| {
            let window = radius - k.powf(-1.0 / 3.0);
            let sup = entries
                .iter()
                .filter(|e| e.alpha <= window)
                .map(|e| e.err)
                .fold(0.0, f64::max);
            format!("sup_err[k={k}]={sup:.3e}")
        })
        .collect();
    summary.push_str(&sups.join(", "));
    match &sweep {
        Some(sw) => {
            write!(summary, "; slope={:.3} (r2={:.3})", sw.rate.slope, sw.rate.r_squared).unwrap()
        }
        None => summary.push_str("; rate fit skipped (needs 3 valid k)"),
    }
    output::summarize(&out_args.out, &summary);
    Ok(())
}

/// Reads argument,weight rows; a non-numeric first record is a header.
fn read_simple_ensemble(path: &PathBuf) -> Result<Vec<(f64, u64)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() == 0 || rec[0].is_empty() {
            continue;
        }
        if i == 0 && rec[0].parse::<f64>().is_err() {
            continue;
        }
        let arg: f64 = rec[0]
            .parse()
            .map_err(|_| CliError::Config(format!("row {}: bad argument '{}'", i + 1, &rec[0])))?;
        let w = if rec.len() > 1 && !rec[1].is_empty() { parse_weight(&rec[1], i + 1)? } else { 1 };
        out.push((arg, w));
    }
    Ok(out)
}

fn parse_weight(text: &str, row: usize) -> Result<u64, CliError> {
    if let Ok(w) = text.parse::<u64>() {
        return Ok(w);
    }
    match text.parse::<f64>() {
        Ok(w) if w >= 0.0 && w.fract() == 0.0 && w < 9.0e15 => Ok(w as u64),
        _ => Err(CliError::Config(format!("row {row}: weight '{text}' is not a whole number"))),
    }
}

/// Pulls (argument, weight) out of a phase-shift or disk table CSV.
fn read_table_ensemble(
    path: &PathBuf,
    alpha_max: Option<f64>,
) -> Result<Vec<(f64, u64)>, CliError> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let arg_col = find("beta_exact").or_else(|| find("x_exact")).ok_or_else(|| {
        CliError::Config("table has neither a beta_exact nor an x_exact column".into())
    })?;
    let mult_col = find("multiplicity");
    let get = |rec: &csv::StringRecord, i: usize| -> Option<f64> { rec.get(i)?.parse().ok() };
    // alpha directly, or nu h, or (l + (d-2)/2)/k.
    let alpha_of = |rec: &csv::StringRecord| -> Option<f64> {
        if let Some(i) = find("alpha") {
            get(rec, i)
        } else if let (Some(n), Some(h)) = (find("nu"), find("h")) {
            Some(get(rec, n)? * get(rec, h)?)
        } else if let (Some(l), Some(k), Some(d)) = (find("l"), find("k"), find("d")) {
            Some((get(rec, l)? + (get(rec, d)? - 2.0) / 2.0) / get(rec, k)?)
        } else {
            None
        }
    };

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if let Some(bound) = alpha_max {
            let alpha = alpha_of(&rec).ok_or_else(|| {
                CliError::Config(format!(
                    "row {}: cannot determine alpha for --alpha-max filtering",
                    i + 2
                ))
            })?;
            if alpha > bound {
                continue;
            }
        }
        let arg = get(&rec, arg_col).ok_or_else(|| {
            CliError::Config(format!("row {}: bad value in argument column", i + 2))
        })?;
        let w = match mult_col {
            Some(c) => parse_weight(&rec[c], i + 2)?,
            None => 1,
        };
        out.push((arg, w));
    }
    Ok(out)
}

fn run_discrepancy(
    ctx: &Ctx,
    input: Option<PathBuf>,
    from_table: Option<PathBuf>,
    alpha_max: Option<f64>,
    et_harmonics: Option<u32>,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    let (pairs, source) = match (&input, &from_table) {
        (Some(p), None) => {
            if alpha_max.is_some() {
                return Err(CliError::Config("--alpha-max applies only to --from-table".into()));
            }
            (read_simple_ensemble(p)?, p.display().to_string())
        }
        (None, Some(p)) => (read_table_ensemble(p, alpha_max)?, p.display().to_string()),
        _ => unreachable!("clap enforces exactly one input source"),
    };
    let ensemble = CircleEnsemble::from_weighted_args(pairs);
    if ensemble.is_empty() {
        return Err(CliError::Config(format!("{source}: ensemble has no weighted points")));
    }
    let rep = discrepancy(&ensemble);
    let m = et_harmonics.unwrap_or_else(|| default_harmonic_count(ensemble.total_weight()));
    if m < 1 {
        return Err(CliError::Config("--et-harmonics must be at least 1".into()));
    }
    let bound = erdos_turan_bound(&ensemble, m);

    let content = match out_args.format {
        Format::Csv => format!(
            "discrepancy,witness_lo,witness_hi,witness_is_deficit,n_points,total_weight,\
             et_harmonics,et_bound\n{},{},{},{},{},{},{},{}\n",
            rep.discrepancy,
            rep.witness.0,
            rep.witness.1,
            u8::from(rep.witness_is_deficit),
            rep.n_points,
            rep.total_weight,
            m,
            bound
        ),
        Format::Json => output::json_document(
            "discrepancy",
            ctx.metadata(json!({ "source": source, "alpha_max": alpha_max })),
            "report",
            json!({
                "discrepancy": serde_json::to_value(rep).unwrap(),
                "erdos_turan": { "harmonics": m, "bound": bound },
            }),
        ),
    };
    output::write_data(&out_args.out, &content)?;
    output::summarize(
        &out_args.out,
        &format!(
            "discrepancy: D={:.6} (n={}, K={}), ET(m={})={:.6}",
            rep.discrepancy, rep.n_points, rep.total_weight, m, bound
        ),
    );
    Ok(())
}

fn run_sweep(
    ctx: &Ctx,
    pot_args: &PotentialArgs,
    t: &TableArgs,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    plots_need_csv(out_args)?;
    validate_dim(t.dim)?;
    validate_list("--h", &t.h_list)?;
    if t.h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config("--h must be strictly decreasing for sweep".into()));
    }
    let s = load_potential(pot_args)?;
    let radius = s.potential.support_radius();
    let profile = phase_generator(&s.potential, &default_eta_grid(radius))?;
    let opts = TableOptions { epsilon: t.epsilon, kappa: t.kappa, r_match: None };

    struct Row {
        h: f64,
        entries: usize,
        included: usize,
        err_max: f64,
        d_exact: f64,
        d_wkb: f64,
        et_bound: f64,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(t.h_list.len());
    for &h_in in &t.h_list {
        let h = s.h(h_in);
        let l_max = t.lmax.unwrap_or_else(|| default_l_max(radius, h));
        let table = build_table_with_profile(&s.potential, &profile, t.dim, h, l_max, &opts)?;
        let mut err_max = 0.0_f64;
        let mut included = 0usize;
        for e in &table.entries {
            if !any_flag(&e.flags) {
                included += 1;
                err_max = err_max.max(circle_distance(e.beta_exact, e.beta_wkb));
            }
        }
        let visible = |e: &&phaselab::radial::PhaseShiftEntry| (e.l as f64) * h < radius;
        let exact = CircleEnsemble::from_weighted_args(
            table.entries.iter().filter(visible).map(|e| (e.beta_exact, e.multiplicity)),
        );
        let wkb = CircleEnsemble::from_weighted_args(
            table.entries.iter().filter(visible).map(|e| (e.beta_wkb, e.multiplicity)),
        );
        if exact.is_empty() {
            return Err(CliError::Numerical(format!(
                "h = {h}: no angular momenta with l h < {radius}"
            )));
        }
        let d_exact = discrepancy(&exact).discrepancy;
        let d_wkb = discrepancy(&wkb).discrepancy;
        let et_bound = erdos_turan_bound(&exact, default_harmonic_count(exact.total_weight()));
        rows.push(Row {
            h,
            entries: table.entries.len(),
            included,
            err_max,
            d_exact,
            d_wkb,
            et_bound,
        });
    }

    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.err_max).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.d_exact).collect();
    let err_fit = fit_rate(&hs, &errs).ok();
    let d_fit = fit_rate(&hs, &ds).ok();

    let content = match out_args.format {
        Format::Csv => {
            let mut csv = String::from("h,entries,included,err_max,d_exact,d_wkb,et_bound\n");
            for r in &rows {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    r.h, r.entries, r.included, r.err_max, r.d_exact, r.d_wkb, r.et_bound
                )
                .unwrap();
            }
            csv
        }
        Format::Json => {
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "h": r.h, "entries": r.entries, "included": r.included,
                        "err_max": r.err_max, "d_exact": r.d_exact, "d_wkb": r.d_wkb,
                        "et_bound": r.et_bound,
                    })
                })
                .collect();
            output::json_document(
                "sweep",
                ctx.metadata(json!({
                    "potential": s.given,
                    "energy": s.energy,
                    "d": t.dim,
                    "h_input": t.h_list,
                    "epsilon": t.epsilon,
                    "kappa": t.kappa,
                    "tolerances": tolerance_block(),
                })),
                "results",
                json!({
                    "rows": json_rows,
                    "err_fit": err_fit.as_ref().map(|f| serde_json::to_value(f).unwrap()),
                    "d_fit": d_fit.as_ref().map(|f| serde_json::to_value(f).unwrap()),
                }),
            )
        }
    };
    output::write_data(&out_args.out, &content)?;
    if out_args.plots {
        output::write_plot_script(&out_args.out, |data| {
            format!(
                "set xlabel 'h'\nset logscale xy\n\
                 plot '{data}' using 1:4 with linespoints title 'max WKB error', \\\n     \
                 '' using 1:5 with linespoints title 'discrepancy'\n"
            )
        })?;
    }

    let mut summary = format!("sweep d={}: ", t.dim);
    match &err_fit {
        Some(f) => write!(summary, "err slope={:.3} (r2={:.3})", f.slope, f.r_squared).unwrap(),
        None => summary.push_str("err fit skipped"),
    }
    match &d_fit {
        Some(f) => write!(summary, ", D slope={:.3}", f.slope).unwrap(),
        None => summary.push_str(", D fit skipped"),
    }
    if let Some(last) = rows.last() {
        write!(summary, "; h={}: err_max={:.3e}, D={:.4}", last.h, last.err_max, last.d_exact)
            .unwrap();
    }
    output::summarize(&out_args.out, &summary);
    Ok(())
}

fn run_check_potential(
    ctx: &Ctx,
    pot_args: &PotentialArgs,
    out_args: &OutputArgs,
) -> Result<(), CliError> {
    let s = load_potential(pot_args)?;
    let radius = s.potential.support_radius();
    let region = interaction_region(&s.potential);
    let grid = default_eta_grid(radius);
    let nt = check_nontrapping(&s.potential, &grid);
    let ac = check_angle_condition(&s.potential);
    let overall = nt.pass && ac.pass;
    let unresolved: Vec<f64> =
        nt.per_eta.iter().filter(|r| r.bracketing_failed).map(|r| r.eta).collect();
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };

    let content = match out_args.format {
        // The default "csv" renders the report as plain text.
        Format::Csv => {
            let mut text = String::new();
            writeln!(text, "potential: {}", serde_json::to_string(&s.given).unwrap()).unwrap();
            writeln!(text, "energy: {}", s.energy).unwrap();
            writeln!(text, "support radius: {radius}").unwrap();
            writeln!(text, "interaction region: r0 = {:.6}", region.r0).unwrap();
            writeln!(
                text,
                "nontrapping: {} (min |F'| = {:.3e} over {} impact parameters{})",
                verdict(nt.pass),
                nt.min_abs_fprime,
                grid.len(),
                if unresolved.is_empty() {
                    String::new()
                } else {
                    format!(", {} unresolved", unresolved.len())
                }
            )
            .unwrap();
            writeln!(
                text,
                "monotone deflection: {} (min margin = {:.3e} at r = {:.4}, max V' = {:.3e}{})",
                verdict(ac.pass),
                ac.min_margin,
                ac.margin_argmin,
                ac.max_vprime,
                if ac.vacuous { ", vacuous" } else { "" }
            )
            .unwrap();
            writeln!(text, "overall: {}", verdict(overall)).unwrap();
            text
        }
        Format::Json => output::json_document(
            "check-potential",
            ctx.metadata(json!({ "potential": s.given, "energy": s.energy })),
            "report",
            json!({
                "support_radius": radius,
                "interaction_region": serde_json::to_value(region).unwrap(),
                "nontrapping": {
                    "pass": nt.pass,
                    "min_abs_fprime": nt.min_abs_fprime,
                    "eta_samples": grid.len(),
                    "unresolved_etas": unresolved,
                },
                "angle_condition": serde_json::to_value(&ac).unwrap(),
                "overall": overall,
            }),
        ),
    };
    output::write_data(&out_args.out, &content)?;
    if out_args.out.is_some() || out_args.format == Format::Json {
        output::summarize(&out_args.out, &format!("check-potential: {}", verdict(overall)));
    }
    Ok(())
}

fn run_specfun_selftest(ctx: &Ctx, out_args: &OutputArgs) -> Result<(), CliError> {
    let rows = selftest_table();
    let mut max_diff = 0.0_f64;
    let mut max_wronskian = 0.0_f64;
    for r in &rows {
        max_diff = max_diff.max(r.max_scaled_diff);
        max_wronskian = max_wronskian.max(r.wronskian_rel_err);
    }

    let content = match out_args.format {
        Format::Csv => {
            let mut csv = String::from("order,argument,method_a,method_b,rel_diff\n");
            for r in &rows {
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    r.order,
                    r.argument,
                    r.recurrence.y.atan2(r.recurrence.j),
                    r.quadrature.y.atan2(r.quadrature.j),
                    r.max_scaled_diff
                )
                .unwrap();
            }
            csv
        }
        Format::Json => {
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "order": r.order,
                        "argument": r.argument,
                        "method_a": r.recurrence.y.atan2(r.recurrence.j),
                        "method_b": r.quadrature.y.atan2(r.quadrature.j),
                        "rel_diff": r.max_scaled_diff,
                        "wronskian_rel_err": r.wronskian_rel_err,
                    })
                })
                .collect();
            output::json_document(
                "specfun-selftest",
                ctx.metadata(json!({})),
                "rows",
                Value::Array(json_rows),
            )
        }
    };
    output::write_data(&out_args.out, &content)?;
    output::summarize(
        &out_args.out,
        &format!(
            "specfun-selftest: {} points, max rel_diff={max_diff:.3e}, \
             max Wronskian err={max_wronskian:.3e}",
            rows.len()
        ),
    );
    if max_diff > 1e-8 || max_wronskian > 1e-9 {
        return Err(CliError::Numerical(format!(
            "selftest outside tolerance: rel_diff={max_diff:.3e}, wronskian={max_wronskian:.3e}"
        )));
    }
    Ok(())
}
