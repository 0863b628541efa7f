//! Config loading, command dispatch and result persistence for the
//! `chainbound` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chainbound::chaining::{ChainingNet, NetExport};
use chainbound::holder::{
    log_blowup_equivalence, sandwich_grid, sandwich_with, seminorm_embedded, SampledField, WeightTable,
};
use chainbound::metric::{DimensionInfo, Metric, MetricSpace};
use chainbound::modulus::{Admissible, Modulus};
use chainbound::pam::{self, GreenGrid, PamParams};
use chainbound::report::{contracts_table, Cell, Contract, Table};
use chainbound::rng::derive_seed;
use chainbound::samples::{random_field, FieldKind};
use chainbound::stochastic::{self as st};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const POINTCLOUD_HEADER: &str = "# chainbound-pointcloud v1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] chainbound::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use chainbound::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(E::Parameter(_) | E::Domain { .. } | E::InvalidModulus(_) | E::Parse { .. }) => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

// ---------------------------------------------------------------------------
// Configuration.

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: String,
    #[serde(default)]
    params: Value,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimsKind {
    /// Closed-form constants of the ambient `R^dim`.
    #[default]
    Euclidean,
    /// Greedy-certified `(d, c)` with a sampled `n2`.
    Fit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimsSpec {
    Explicit(DimensionInfo),
    Kind(DimsKind),
}

impl Default for DimsSpec {
    fn default() -> Self {
        DimsSpec::Kind(DimsKind::Euclidean)
    }
}

impl DimsSpec {
    fn resolve(&self, space: &MetricSpace) -> Result<DimensionInfo, CliError> {
        Ok(match self {
            DimsSpec::Explicit(d) => {
                d.validate()?;
                *d
            }
            DimsSpec::Kind(DimsKind::Euclidean) => match space.dim() {
                0 => return Err(usage("euclidean dims need a coordinate space")),
                d => DimensionInfo::euclidean(d)?,
            },
            DimsSpec::Kind(DimsKind::Fit) => space.fit_dimension(8)?.info,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `count` reproducible random fields cycling through Lipschitz,
    /// square-root and Brownian types.
    Random {
        #[serde(default = "default_count")]
        count: usize,
    },
    Values { values: Vec<f64> },
}

fn default_count() -> usize {
    10
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Random { count: default_count() }
    }
}

impl FieldSpec {
    fn materialize(&self, space: &MetricSpace, seed: u64) -> Result<Vec<(String, SampledField)>, CliError> {
        match self {
            FieldSpec::Values { values } => Ok(vec![("values".into(), SampledField::scalar(values.clone())?)]),
            FieldSpec::Random { count } => (0..*count)
                .map(|i| {
                    let kind = FieldKind::ALL[i % 3];
                    let f = random_field(space, kind, derive_seed(seed, &format!("field-{i}")))?;
                    Ok((format!("{kind:?}-{i}").to_lowercase(), f))
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetBuildParams {
    pub points: PathBuf,
    #[serde(default)]
    pub dims: DimsSpec,
    #[serde(default)]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormParams {
    pub points: PathBuf,
    pub weight: Modulus,
    #[serde(default)]
    pub field: FieldSpec,
    /// Net JSON for the embedded seminorm column.
    #[serde(default)]
    pub net: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichParams {
    pub points: PathBuf,
    /// Prebuilt net; built from `dims` when absent.
    #[serde(default)]
    pub net: Option<PathBuf>,
    #[serde(default)]
    pub dims: DimsSpec,
    #[serde(default = "default_weights")]
    pub weights: Vec<Modulus>,
    #[serde(default)]
    pub fields: FieldSpec,
}

fn default_weights() -> Vec<Modulus> {
    vec![
        Modulus::Power { alpha: 0.3 },
        Modulus::Power { alpha: 0.7 },
        Modulus::LogDamped { beta: 1.0, gamma: 1.0, base: Box::new(Modulus::Power { alpha: 0.5 }) },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupParams {
    pub points: PathBuf,
    pub alpha_star: f64,
    pub gamma: f64,
    pub beta: f64,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: usize,
    #[serde(default = "default_grid_tol")]
    pub grid_tol: f64,
    #[serde(default)]
    pub fields: FieldSpec,
}

fn default_alpha_grid() -> usize {
    200
}

fn default_grid_tol() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PamModulusParams {
    pub solver: PamParams,
    #[serde(default = "default_time_exponent")]
    pub time_exponent: f64,
}

fn default_time_exponent() -> f64 {
    pam::TIME_EXPONENT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenParams {
    #[serde(default)]
    pub grid: GreenGrid,
    #[serde(default = "default_green_k")]
    pub k: usize,
}

fn default_green_k() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Command {
    NetBuild(NetBuildParams),
    Seminorm(SeminormParams),
    Sandwich(SandwichParams),
    Blowup(BlowupParams),
    SupIntegrals(st::SupIntegralsParams),
    OuLongterm(st::OuLongtermParams),
    MartingaleSup(st::MartingaleParams),
    GoodLambda(st::GoodLambdaParams),
    Levy(st::LevyParams),
    Kc(st::KcParams),
    PamSolve(PamParams),
    PamModulus(PamModulusParams),
    GreenConstant(GreenParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::NetBuild(_) => "net-build",
            Command::Seminorm(_) => "seminorm",
            Command::Sandwich(_) => "sandwich",
            Command::Blowup(_) => "blowup",
            Command::SupIntegrals(_) => "sup-integrals",
            Command::OuLongterm(_) => "ou-longterm",
            Command::MartingaleSup(_) => "martingale-sup",
            Command::GoodLambda(_) => "good-lambda",
            Command::Levy(_) => "levy",
            Command::Kc(_) => "kc",
            Command::PamSolve(_) => "pam-solve",
            Command::PamModulus(_) => "pam-modulus",
            Command::GreenConstant(_) => "green-constant",
        }
    }

    fn parse(name: &str, params: Value) -> Result<Self, CliError> {
        fn p<T: serde::de::DeserializeOwned>(v: Value, name: &str) -> Result<T, CliError> {
            let v = if v.is_null() { Value::Object(Default::default()) } else { v };
            serde_json::from_value(v).map_err(|e| usage(format!("invalid params for {name}: {e}")))
        }
        Ok(match name {
            "net-build" => Command::NetBuild(p(params, name)?),
            "seminorm" => Command::Seminorm(p(params, name)?),
            "sandwich" => Command::Sandwich(p(params, name)?),
            "blowup" => Command::Blowup(p(params, name)?),
            "sup-integrals" => Command::SupIntegrals(p(params, name)?),
            "ou-longterm" => Command::OuLongterm(p(params, name)?),
            "martingale-sup" => Command::MartingaleSup(p(params, name)?),
            "good-lambda" => Command::GoodLambda(p(params, name)?),
            "levy" => Command::Levy(p(params, name)?),
            "kc" => Command::Kc(p(params, name)?),
            "pam-solve" => Command::PamSolve(p(params, name)?),
            "pam-modulus" => Command::PamModulus(p(params, name)?),
            "green-constant" => Command::GreenConstant(p(params, name)?),
            other => return Err(usage(format!("unknown command {other:?}"))),
        })
    }

    /// The config seed is the single source of randomness.
    fn set_seed(&mut self, seed: u64) {
        match self {
            Command::SupIntegrals(p) => p.seed = seed,
            Command::OuLongterm(p) => p.seed = seed,
            Command::MartingaleSup(p) => p.seed = seed,
            Command::GoodLambda(p) => p.seed = seed,
            Command::Levy(p) => p.seed = seed,
            Command::Kc(p) => p.seed = seed,
            Command::PamSolve(p) => p.seed = seed,
            Command::PamModulus(p) => p.solver.seed = seed,
            _ => {}
        }
    }

    /// Resolves relative input paths against `base`.
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match self {
            Command::NetBuild(p) => fix(&mut p.points),
            Command::Seminorm(p) => {
                fix(&mut p.points);
                p.net.as_mut().map(fix);
            }
            Command::Sandwich(p) => {
                fix(&mut p.points);
                p.net.as_mut().map(fix);
            }
            Command::Blowup(p) => fix(&mut p.points),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses TOML or JSON (detected by extension, then by a leading `{`).
    /// Relative input paths are resolved against `base`.
    pub fn parse(text: &str, json: bool, base: &Path) -> Result<Self, CliError> {
        let value: Value = if json {
            serde_json::from_str(text).map_err(|e| usage(format!("invalid JSON config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| usage(format!("invalid TOML config: {e}")))?
        };
        let raw: RawConfig = serde_json::from_value(value).map_err(|e| usage(format!("invalid config: {e}")))?;
        let mut command = Command::parse(&raw.command, raw.params)?;
        command.set_seed(raw.seed);
        command.rebase(base);
        Ok(Self { command, seed: raw.seed, output: raw.output.map(|o| if o.is_relative() { base.join(o) } else { o }) })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        Self::parse(&text, json, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.command.set_seed(seed);
        self
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&serde_json::to_value(self).expect("serializable config"))
            .expect("serializable value");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

// ---------------------------------------------------------------------------
// Point clouds.

/// Reads `# chainbound-pointcloud v1` files: optional `# metric=euclidean`
/// or `# metric=chebyshev`, then one point per line, coordinates separated
/// by whitespace or commas. Blank lines and further `#` lines are skipped.
pub fn load_point_cloud(path: &Path) -> Result<MetricSpace, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(parse_point_cloud(&text)?)
}

pub fn parse_point_cloud(text: &str) -> chainbound::Result<MetricSpace> {
    let perr = |line: usize, msg: String| chainbound::Error::Parse { line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h == POINTCLOUD_HEADER => {}
        _ => return Err(perr(1, format!("expected header {POINTCLOUD_HEADER:?}"))),
    }
    let mut metric = Metric::Euclidean;
    let (mut coords, mut dim) = (Vec::new(), None);
    for (no, l) in lines {
        if l.is_empty() {
            continue;
        }
        if let Some(c) = l.strip_prefix('#') {
            if let Some(m) = c.trim().strip_prefix("metric=") {
                metric = match m.trim() {
                    "euclidean" => Metric::Euclidean,
                    "chebyshev" => Metric::Chebyshev,
                    other => return Err(perr(no, format!("unknown metric {other:?}"))),
                };
            }
            continue;
        }
        let row = l
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(perr(no, format!("invalid coordinate {t:?}"))),
            })
            .collect::<chainbound::Result<Vec<f64>>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => return Err(perr(no, format!("expected {d} coordinates, got {}", row.len()))),
            _ => {}
        }
        coords.extend(row);
    }
    let dim = dim.unwrap_or(1);
    MetricSpace::from_coords(coords, dim, metric)
}

fn load_net(path: &Path, space: &MetricSpace) -> Result<ChainingNet, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let ex: NetExport = serde_json::from_str(&text).map_err(|e| usage(format!("{}: invalid net: {e}", path.display())))?;
    Ok(ChainingNet::import(space, ex)?)
}

// ---------------------------------------------------------------------------
// Execution.

/// Files produced by one command, written only after it completes.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub contracts: Vec<Contract>,
}

impl Outcome {
    fn table(&mut self, name: impl Into<String>, t: &Table) -> Result<(), CliError> {
        self.files.push((name.into(), t.to_csv()?.into_bytes()));
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Contract> {
        self.contracts.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub command: String,
    pub config_hash: String,
    pub library_version: String,
    pub seed: u64,
    pub workers: Option<usize>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub contracts_passed: usize,
    pub contracts_failed: usize,
}

fn invariant_contracts(net: &ChainingNet) -> Vec<Contract> {
    net.verify()
        .items
        .into_iter()
        .map(|i| Contract::new(format!("net_{}", i.name), None, i.passed, i.witness.unwrap_or_default()))
        .collect()
}

fn net_table(net: &ChainingNet) -> Table {
    let mut t = Table::new(["level", "radius", "points", "new_points", "edges", "cover_size"]);
    for n in 0..=net.depth() {
        let prev = if n == 0 { 0 } else { net.level(n - 1).len() };
        t.push(vec![
            n.into(),
            (-(n as f64)).exp2().into(),
            net.level(n).len().into(),
            (net.level(n).len() - prev).into(),
            net.edges(n).len().into(),
            net.cover_sizes().get(n).copied().unwrap_or(0).into(),
        ]);
    }
    t
}

/// Runs the command and returns its outputs without touching the disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let name = cfg.command.name();
    match &cfg.command {
        Command::NetBuild(p) => {
            let space = load_point_cloud(&p.points)?;
            let net = ChainingNet::build(&space, p.dims.resolve(&space)?, p.depth)?;
            out.table(format!("{name}.csv"), &net_table(&net))?;
            out.contracts = invariant_contracts(&net);
            let json = serde_json::to_vec_pretty(&net.export()).map_err(chainbound::Error::from)?;
            out.files.push(("net.json".into(), json));
        }
        Command::Seminorm(p) => {
            let space = load_point_cloud(&p.points)?;
            let net = p.net.as_deref().map(|n| load_net(n, &space)).transpose()?;
            let table = WeightTable::new(&space, &p.weight)?;
            let mut t = Table::new(["field", "weight", "exact", "witness_x", "witness_y", "embedded"]);
            for (i, (label, f)) in p.field.materialize(&space, cfg.seed)?.into_iter().enumerate() {
                let s = table.seminorm(&f)?;
                let emb = net.as_ref().map(|n| seminorm_embedded(&f, n, &p.weight)).transpose()?;
                let (wx, wy) = s.witness.unwrap_or((0, 0));
                t.push(vec![
                    label.into(),
                    p.weight.to_string().into(),
                    s.value.into(),
                    wx.into(),
                    wy.into(),
                    emb.map_or(Cell::Text(String::new()), |e| e.value.into()),
                ]);
                out.contracts.push(Contract::new("seminorm_finite", Some(i), s.value.is_finite(), s.value.to_string()));
            }
            out.table(format!("{name}.csv"), &t)?;
        }
        Command::Sandwich(p) => {
            let space = load_point_cloud(&p.points)?;
            let net = match &p.net {
                Some(path) => load_net(path, &space)?,
                None => ChainingNet::build(&space, p.dims.resolve(&space)?, None)?,
            };
            out.contracts = invariant_contracts(&net);
            let fields = p.fields.materialize(&space, cfg.seed)?;
            let grid = sandwich_grid(&net);
            let mut t = Table::new([
                "weight", "field", "exact", "embedded", "c_lower", "c_upper", "lower_holds", "upper_holds",
            ]);
            for w in &p.weights {
                let adm = Admissible::certify_on(w.clone(), &grid, Admissible::DEFAULT_TOL)?;
                let table = WeightTable::new(&space, w)?;
                for (label, f) in &fields {
                    let s = sandwich_with(&net, f, &adm, &table)?;
                    out.contracts.push(Contract::new(
                        "sandwich",
                        Some(t.rows.len()),
                        s.holds(),
                        format!("{w} {label}: exact {} embedded {}", s.exact.value, s.embedded.value),
                    ));
                    t.push(vec![
                        w.to_string().into(),
                        label.clone().into(),
                        s.exact.value.into(),
                        s.embedded.value.into(),
                        s.constants.lower.into(),
                        s.constants.upper.into(),
                        s.lower_holds.into(),
                        s.upper_holds.into(),
                    ]);
                }
            }
            out.table(format!("{name}.csv"), &t)?;
        }
        Command::Blowup(p) => {
            let space = load_point_cloud(&p.points)?;
            let mut t = Table::new(["field", "lhs", "middle", "rhs", "holds"]);
            for (i, (label, f)) in p.fields.materialize(&space, cfg.seed)?.into_iter().enumerate() {
                let b = log_blowup_equivalence(&space, &f, p.alpha_star, p.gamma, p.beta, p.alpha_grid)?;
                let ok = b.holds(p.grid_tol);
                out.contracts.push(Contract::new("blowup", Some(i), ok, format!("{} <= {} <= {}", b.lhs, b.middle, b.rhs)));
                t.push(vec![label.into(), b.lhs.into(), b.middle.into(), b.rhs.into(), ok.into()]);
            }
            out.table(format!("{name}.csv"), &t)?;
        }
        Command::SupIntegrals(p) => {
            let r = st::experiment_sup_integrals(p)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
        Command::OuLongterm(p) => {
            let r = st::experiment_ou_longterm(p)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
        Command::MartingaleSup(p) => {
            let r = st::experiment_martingale_sup(p)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
        Command::GoodLambda(p) => {
            let r = st::experiment_good_lambda(p)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
        Command::Levy(p) => {
            let r = st::experiment_levy_modulus(p)?;
            let (a, b) = r.tables();
            out.table(format!("{name}.csv"), &a)?;
            out.table(format!("{name}-weighted.csv"), &b)?;
            out.contracts = r.contracts();
        }
        Command::Kc(p) => {
            let r = st::experiment_kc_bound(p)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
        Command::PamSolve(p) => {
            let ens = pam::pam_solve(p)?;
            let mut t = Table::new(["t", "x", "mean", "stderr"]);
            let single = ens.replicates() < 2;
            for (i, &time) in ens.times.iter().enumerate() {
                for (j, &x) in ens.positions.iter().enumerate() {
                    let (m, se) = if single { (ens.value(0, i, j), 0.0) } else { ens.mean_at(i, j) };
                    t.push(vec![time.into(), x.into(), m.into(), se.into()]);
                }
            }
            out.table(format!("{name}.csv"), &t)?;
            let np = ens.positions.len();
            let boundary = ens.data.chunks(np).all(|row| row[0] == 0.0 && row[np - 1] == 0.0);
            out.contracts.push(Contract::new("pam_dirichlet_boundary", None, boundary, "U(t,0) = U(t,1) = 0"));
            let mut bin = Vec::new();
            ens.write_snapshot(&mut bin)?;
            out.files.push((format!("{name}.bin"), bin));
        }
        Command::PamModulus(p) => {
            let ens = pam::pam_solve(&p.solver)?;
            let r = pam::pam_modulus_statistic_with(&ens, p.solver.p, p.time_exponent)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
        Command::GreenConstant(p) => {
            let r = pam::green_regularity_constant(&p.grid, p.k)?;
            out.table(format!("{name}.csv"), &r.table())?;
            out.contracts = r.contracts();
        }
    }
    Ok(out)
}

/// Executes `cfg` on `workers` threads and writes `<command>.csv`,
/// `contracts.csv`, any extra artifacts and `manifest.json` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, workers: Option<usize>) -> Result<(ResultManifest, Outcome), CliError> {
    if workers == Some(0) {
        return Err(usage("--workers must be positive"));
    }
    let start = Instant::now();
    let outcome = chainbound::mc::with_workers(workers, || execute(cfg))??;
    let wall_time_s = start.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let write = |name: &str, bytes: &[u8]| -> Result<(), CliError> {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    };
    for (name, bytes) in &outcome.files {
        write(name, bytes)?;
    }
    write("contracts.csv", contracts_table(&outcome.contracts).to_csv()?.as_bytes())?;
    let mut outputs: Vec<String> = outcome.files.iter().map(|f| f.0.clone()).collect();
    outputs.extend(["contracts.csv".to_owned(), "manifest.json".to_owned()]);
    let failed = outcome.failures().count();
    let manifest = ResultManifest {
        command: cfg.command.name().to_owned(),
        config_hash: cfg.hash(),
        library_version: env!("CARGO_PKG_VERSION").to_owned(),
        seed: cfg.seed,
        workers,
        wall_time_s,
        outputs,
        contracts_passed: outcome.contracts.len() - failed,
        contracts_failed: failed,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(chainbound::Error::from)?;
    write("manifest.json", &json)?;
    Ok((manifest, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_cloud_parsing() {
        let s = parse_point_cloud("# chainbound-pointcloud v1\n# metric=chebyshev\n0 0\n\n1, 2\n").unwrap();
        assert_eq!((s.len(), s.dim(), s.metric()), (2, 2, Metric::Chebyshev));
        assert_eq!(s.diameter(), 2.0);
        let err = parse_point_cloud("# chainbound-pointcloud v1\n0 0\n1 NaN\n").unwrap_err();
        assert!(matches!(err, chainbound::Error::Parse { line: 3, .. }), "{err:?}");
        assert!(matches!(parse_point_cloud("0 0\n"), Err(chainbound::Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_point_cloud("# chainbound-pointcloud v1\n0 0\n1\n"),
            Err(chainbound::Error::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_point_cloud("# chainbound-pointcloud v1\n0.5\n"), Err(chainbound::Error::Nontrivial)));
    }

    #[test]
    fn config_formats_agree() {
        let toml = "command = \"kc\"\nseed = 4\n[params]\nalpha = 0.5\nbeta = 0.25\np = 8.0\ngrid_size = 33\nreplicates = 10\n";
        let json = r#"{"command":"kc","seed":4,"params":{"alpha":0.5,"beta":0.25,"p":8.0,"grid_size":33,"replicates":10}}"#;
        let a = ExperimentConfig::parse(toml, false, Path::new(".")).unwrap();
        let b = ExperimentConfig::parse(json, true, Path::new(".")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), a.clone().with_seed(5).hash());
        match &a.command {
            Command::Kc(p) => assert_eq!(p.seed, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_violations_are_usage_errors() {
        for bad in [
            "command = \"kc\"\nseed = \"zero\"\n",
            "command = \"nope\"\n",
            "command = \"kc\"\n[params]\nalpha = 0.5\n",
            "command = \"kc\"\nextra = 1\n",
        ] {
            let err = ExperimentConfig::parse(bad, false, Path::new(".")).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }
}
