use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use padic_conv::appendix::{bernstein_mc, scaling_study, search_good_signs};
use padic_conv::cache::CountCache;
use padic_conv::counting::{count_fibers_with_budget, verify_convolution_identity_with_budget};
use padic_conv::density::{frs_scan, to_density, ScanOptions};
use padic_conv::fourier::{hp_norm, inequality_suite, smoothing_chain, transform, Harmonics};
use padic_conv::group::{GroupKind, GroupSpec};
use padic_conv::morphism::resolve_map;
use padic_conv::poly::{parse_int_poly, IntPoly};
use padic_conv::ring::ResidueRing;
use padic_conv::sums::{
    check_eps_choice, decide_convergence, eval_sum, find_epsilon, igusa_zeta, instance_library, level_set_measures_with_budget,
    parse_rational, parse_sum_expr, poly_growth_bound, rationality_exhibit, SumExpr, ZetaMode,
};
use padic_conv::Error;

use crate::config::*;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Config(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl CliError {
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Core(e) => {
                let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
                if let Error::SearchExhausted { best, .. } = e {
                    v["best"] = to_value(best);
                }
                json!({ "error": v })
            }
            CliError::Config(msg) => json!({ "error": { "kind": "ConfigError", "message": msg } }),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Everything a command produces. `config` and `result` go into the
/// report; `meta` goes into the timestamped sidecar.
pub struct Outcome {
    pub config: Value,
    pub result: Value,
    pub files: Vec<(String, String)>,
    pub meta: Map<String, Value>,
}

impl Outcome {
    fn new(config: &impl Serialize, result: impl Serialize) -> Self {
        Outcome { config: to_value(config), result: to_value(result), files: Vec::new(), meta: Map::new() }
    }

    fn file(mut self, name: impl Into<String>, contents: String) -> Self {
        self.files.push((name.into(), contents));
        self
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn required(value: &str, what: &str) -> CliResult<()> {
    if value.trim().is_empty() {
        return Err(CliError::Config(format!("missing --{what}")));
    }
    Ok(())
}

pub fn cache_dir(global: &GlobalConfig) -> PathBuf {
    global
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

pub fn dispatch(command: &Command, file: Option<&Value>, global: &GlobalConfig) -> CliResult<Outcome> {
    let path = command.section();
    match command {
        Command::Count(a) => count(resolve(file, path, a)?, global),
        Command::Identity(a) => identity(resolve(file, path, a)?, global),
        Command::Scan(a) => scan(resolve(file, path, a)?, global),
        Command::Fourier(a) => fourier(resolve(file, path, a)?, global),
        Command::Zeta(a) => zeta(resolve(file, path, a)?, global),
        Command::Sums(a) => sums(resolve(file, path, a)?, global),
        Command::Appendix(AppendixCommand::Search(a)) => search(resolve(file, path, a)?, global),
        Command::Appendix(AppendixCommand::Bernstein(a)) => bernstein(resolve(file, path, a)?, global),
        Command::Appendix(AppendixCommand::Scaling(a)) => scaling(resolve(file, path, a)?, global),
    }
}

fn count(cfg: CountConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    required(&cfg.map, "map")?;
    let f = resolve_map(&cfg.map)?;
    let cache = (!global.no_cache).then(|| CountCache::new(cache_dir(global)));
    let mut entries = Vec::new();
    let mut files = Vec::new();
    let mut hits = Vec::new();
    for &p in &cfg.p {
        for &k in &cfg.k {
            let ring = ResidueRing::new(p, k)?;
            let cv = match &cache {
                Some(c) => {
                    let (cv, hit) = c.load_or_count(&f, &ring, global.budget)?;
                    hits.push(json!({ "p": p, "k": k, "hit": hit, "path": c.path_for(&f, &ring) }));
                    cv
                }
                None => count_fibers_with_budget(&f, &ring, global.budget)?,
            };
            entries.push(json!({
                "p": p,
                "k": k,
                "group_order": cv.counts().len(),
                "total": cv.total(),
                "max": cv.max(),
                "at_identity": cv.at_identity(),
                "counts": cv.counts(),
            }));
            files.push((format!("counts_p{p}_k{k}.csv"), cv.to_csv()));
        }
    }
    let mut out = Outcome::new(&cfg, json!({ "map": f.to_string(), "label": f.label(), "entries": entries }));
    out.files = files;
    out.meta.insert("cache".into(), Value::Array(hits));
    Ok(out)
}

fn identity(cfg: IdentityConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    required(&cfg.map, "map")?;
    let f = resolve_map(&cfg.map)?;
    let g = match &cfg.map2 {
        Some(m) => resolve_map(m)?,
        None => f.clone(),
    };
    let mut reports = Vec::new();
    for &p in &cfg.p {
        for &k in &cfg.k {
            reports.push(verify_convolution_identity_with_budget(&f, &g, &ResidueRing::new(p, k)?, global.budget)?);
        }
    }
    let equal = reports.iter().all(|r| r.equal);
    Ok(Outcome::new(&cfg, json!({ "equal": equal, "reports": reports })))
}

fn scan(cfg: ScanConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    required(&cfg.map, "map")?;
    let f = resolve_map(&cfg.map)?;
    let opts = ScanOptions { n_max: cfg.n_max, p_list: cfg.p.clone(), k_max: cfg.k_max, tau: cfg.tau, eps: cfg.eps, budget: global.budget };
    let report = frs_scan(&f, &opts)?;
    let mut dat = String::new();
    for &p in &cfg.p {
        for n in 1..=cfg.n_max {
            writeln!(dat, "# p={p} n={n}\n# k sup").unwrap();
            for r in report.rows.iter().filter(|r| r.p == p && r.n == n) {
                writeln!(dat, "{} {}", r.k, r.sup).unwrap();
            }
            dat.push_str("\n\n");
        }
    }
    let csv = report.to_csv();
    Ok(Outcome::new(&cfg, &report).file("scan.csv", csv).file("scan.dat", dat))
}

fn fourier(cfg: FourierConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    let kind: GroupKind = cfg.group.parse()?;
    let ring = ResidueRing::new(cfg.p, cfg.k)?;
    let spec = GroupSpec::new(kind, ring)?;
    let suite = inequality_suite(&spec, cfg.trials, global.seed)?;
    let mut result = json!({ "suite": suite });
    if let Some(m) = &cfg.map {
        let f = resolve_map(m)?;
        if f.target() != kind {
            return Err(Error::TargetMismatch(f.target().to_string(), kind.to_string()).into());
        }
        let density = to_density(&count_fibers_with_budget(&f, &ring, global.budget)?)?;
        let h = Harmonics::new(&spec)?;
        let t = transform(&h, &density)?;
        let norms: Vec<Value> =
            [1.0, 2.0, f64::INFINITY].iter().map(|&p| Ok(json!({ "p": p.to_string(), "norm": hp_norm(&t, p)? }))).collect::<padic_conv::Result<_>>()?;
        let chains = cfg.s.iter().map(|&s| smoothing_chain(&h, &density, s)).collect::<padic_conv::Result<Vec<_>>>()?;
        result["map"] = json!({ "map": f.to_string(), "hp_norms": norms, "smoothing_chain": chains });
    }
    Ok(Outcome::new(&cfg, result))
}

fn monomial_degree(h: &IntPoly) -> Option<u32> {
    let n = h.degree();
    (n > 0 && *h == IntPoly::var(0).pow(n)).then_some(n)
}

fn zeta(cfg: ZetaConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    required(&cfg.poly, "poly")?;
    let h = parse_int_poly(&cfg.poly)?;
    let s_values = cfg.s.iter().map(|s| parse_rational(s)).collect::<padic_conv::Result<Vec<_>>>()?;
    let mode = match cfg.mode.as_str() {
        "closed" => ZetaMode::ClosedForm,
        "empirical" => ZetaMode::Empirical { k: cfg.k_trunc },
        other => return Err(CliError::Config(format!("unknown zeta mode `{other}` (closed or empirical)"))),
    };
    let values: Vec<Value> = s_values
        .iter()
        .map(|s| {
            let z = igusa_zeta(&h, cfg.p, s, mode)?;
            let mut v = to_value(&z);
            v["s"] = json!(s.to_string());
            Ok(v)
        })
        .collect::<padic_conv::Result<_>>()?;
    let mut result = json!({ "poly": h.to_string(), "p": cfg.p, "values": values });
    let mut files = Vec::new();
    if let ZetaMode::Empirical { k } = mode {
        let n_vars = cfg.n_vars.unwrap_or(h.width().max(1));
        let table = level_set_measures_with_budget(&h, n_vars, cfg.p, k, global.budget)?;
        files.push(("level_sets.csv".to_string(), table.to_csv()));
        result["level_sets"] = to_value(&table);
    }
    if cfg.rationality {
        let n = monomial_degree(&h).ok_or_else(|| Error::UnsupportedPolynomial(h.to_string()))?;
        result["rationality"] = to_value(rationality_exhibit(n, cfg.p, &s_values, cfg.k_trunc)?);
    }
    let mut out = Outcome::new(&cfg, result);
    out.files = files;
    Ok(out)
}

fn load_expr(cfg: &SumsConfig) -> CliResult<SumExpr> {
    match (&cfg.expr, &cfg.file, &cfg.instance) {
        (Some(text), None, None) => Ok(parse_sum_expr(text)?),
        (None, Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            Ok(parse_sum_expr(&text)?)
        }
        (None, None, Some(name)) => instance_library()
            .into_iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, _, e)| e)
            .ok_or_else(|| Error::UnknownName(name.clone()).into()),
        _ => Err(CliError::Config("give exactly one of --expr, --file, --instance".into())),
    }
}

fn captured<T: Serialize>(r: padic_conv::Result<T>) -> Value {
    match r {
        Ok(v) => to_value(v),
        Err(e) => json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
    }
}

fn sums(cfg: SumsConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    let expr = load_expr(&cfg)?;
    let q = parse_rational(&cfg.q)?;
    let eps = parse_rational(&cfg.eps)?;
    let mut result = json!({ "expr": expr.to_string(), "l": expr.l(), "q": q.to_string(), "eps": eps.to_string() });
    for action in &cfg.actions {
        match action.as_str() {
            "decide" => result["decide"] = to_value(decide_convergence(&expr, &eps)),
            "eval" => result["eval"] = captured(eval_sum(&expr, &q, &eps)),
            "find-epsilon" => {
                result["find_epsilon"] = captured(find_epsilon(&expr).map(|c| {
                    let ok = check_eps_choice(&expr, &c);
                    json!({ "choice": c, "postcondition_holds": ok })
                }))
            }
            "growth" => {
                let choice = find_epsilon(&expr)?;
                let (e, a) = (f64_of(&choice.eps_exact), f64_of(&choice.alpha_exact));
                let qf = f64_of(&q);
                let bounds: Vec<Value> = expr
                    .terms()
                    .iter()
                    .map(|t| captured(poly_growth_bound(&t.poly, expr.l(), e, qf, a, cfg.checks, global.seed)))
                    .collect();
                result["growth"] = json!({ "eps": choice.eps, "alpha": choice.alpha, "bounds": bounds });
            }
            other => return Err(CliError::Config(format!("unknown sums action `{other}`"))),
        }
    }
    Ok(Outcome::new(&cfg, result))
}

fn f64_of(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn search(cfg: SearchConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    let o = search_good_signs(cfg.n, cfg.eps, cfg.max_trials, global.seed, cfg.c1)?;
    let mut csv = String::from("j,a_j,n_j\n");
    for (j, a) in o.signs.a.iter().enumerate() {
        writeln!(csv, "{},{},{}", j + 1, a, padic_conv::appendix::node(cfg.n, j + 1)).unwrap();
    }
    Ok(Outcome::new(&cfg, &o).file("signs.csv", csv))
}

fn bernstein(cfg: BernsteinConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    let r = bernstein_mc(cfg.n, cfg.s_mult, cfg.t_count, cfg.trials, global.seed)?;
    let mut csv = String::from("m,tail\n");
    for (m, t) in r.t_numerators.iter().zip(&r.tails) {
        writeln!(csv, "{m},{t}").unwrap();
    }
    Ok(Outcome::new(&cfg, &r).file("bernstein.csv", csv))
}

fn scaling(cfg: ScalingConfig, global: &GlobalConfig) -> CliResult<Outcome> {
    let r = scaling_study(&cfg.n_list, cfg.eps, global.seed, cfg.max_trials)?;
    let mut csv = String::from("N,trials_used,l1,l1eps,linf,error_bound_l1,error_bound_l1eps,l1_ratio\n");
    let mut dat = String::from("# N l1 l1eps linf l1_ratio\n");
    for row in &r.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.n, row.trials_used, row.l1, row.l1eps, row.linf, row.error_bound.l1, row.error_bound.l1eps, row.l1_ratio
        )
        .unwrap();
        writeln!(dat, "{} {} {} {} {}", row.n, row.l1, row.l1eps, row.linf, row.l1_ratio).unwrap();
    }
    Ok(Outcome::new(&cfg, &r).file("scaling.csv", csv).file("scaling.dat", dat))
}
