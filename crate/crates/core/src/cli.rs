//! `govchain` command-line front end.
//!
//! Machine-readable results go to stdout, diagnostics to stderr. Exit
//! codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::agent::{decide, off_chain_assess, Policy, ReputationLedger, RuleSet, TemplateRegistry};
use crate::annotation::parse_annotations;
use crate::bundle::standard_dao_bundle;
use crate::canonical::to_canonical_string;
use crate::cas::{CasServer, CasStore, ContentResolver, RemoteCas, DEFAULT_PORT};
use crate::chain::{
    parse_chain_jsonl, verify_chain_encoded, Address, ChainVerdict, Disclosure, DisclosureField,
    Environment, KnownTemplate, DEPLOYER,
};
use crate::digest::{fingerprint, Digest};
use crate::governance::{standard_governance_ontology, GovernanceModel, OntologyDocument, STANDARD_ONTOLOGY_ID};

pub const ENV_CAS_ROOT: &str = "GOVCHAIN_CAS_ROOT";
pub const ENV_CAS_ENDPOINT: &str = "GOVCHAIN_CAS_ENDPOINT";
pub const ENV_CHAIN_FILE: &str = "GOVCHAIN_CHAIN_FILE";
pub const DEFAULT_CONFIG_FILE: &str = "govchain.toml";

const DEFAULT_STATE_DIR: &str = ".govchain";

#[derive(Debug, Parser)]
#[command(name = "govchain", version, about = "Governance disclosure, content-addressed documents and inference over a simulated chain")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Config file (default: ./govchain.toml when present)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    cas_root: Option<PathBuf>,
    /// Remote CAS server as host:port
    #[arg(long, global = true)]
    cas_endpoint: Option<String>,
    #[arg(long, global = true)]
    chain_file: Option<PathBuf>,
    #[arg(long, global = true)]
    registry_file: Option<PathBuf>,
    #[arg(long, global = true)]
    reputation_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the SHA-256 fingerprint of a file
    Hash { file: PathBuf },
    /// Store a file in the local CAS and print its digest
    Publish { file: PathBuf },
    /// Retrieve a document by digest (remote when an endpoint is configured)
    Fetch {
        digest: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List @ontoInstance bindings in a source file
    Scan { file: PathBuf },
    /// Emit built-in templates
    #[command(subcommand)]
    Template(TemplateCommand),
    /// Manage the known-template registry
    #[command(subcommand)]
    Registry(RegistryCommand),
    /// Deploy a simulated contract and print its address
    Deploy(DeployArgs),
    /// Run the on-chain decision for SELF about OTHER
    Infer {
        #[arg(long = "self")]
        this: String,
        #[arg(long)]
        other: String,
    },
    /// Resolve OTHER's documents, assess them and update its reputation
    Assess {
        #[arg(long)]
        other: String,
        /// Caller recorded for the disclosure reads
        #[arg(long = "self")]
        this: Option<String>,
        /// Where to write the .risk.json report
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ontology document the counterpart is expected to use
        #[arg(long)]
        expected_ontology: Option<PathBuf>,
    },
    #[command(subcommand)]
    Chain(ChainCommand),
    #[command(subcommand)]
    Reputation(ReputationCommand),
    /// Serve the local CAS over TCP
    Serve {
        #[arg(long, default_value_t = format!("127.0.0.1:{DEFAULT_PORT}"))]
        bind: String,
    },
}

#[derive(Debug, Subcommand)]
enum TemplateCommand {
    /// The standard DAO governance model; with --out-dir, the full document bundle
    Dao {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Accept,
    Reject,
}

#[derive(Debug, Subcommand)]
enum RegistryCommand {
    Add {
        file: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// Ontology digest or .onto.json file (default: the built-in ontology)
        #[arg(long)]
        onto: Option<String>,
    },
    List,
}

#[derive(Debug, Args)]
struct DeployArgs {
    #[arg(long)]
    gov: Option<String>,
    #[arg(long)]
    onto: Option<String>,
    #[arg(long)]
    src: Option<String>,
    /// Familiar template as GOV_DIGEST:ONTO_DIGEST (repeatable)
    #[arg(long)]
    knows: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum ChainCommand {
    /// Check block hashes and linkage
    Verify,
}

#[derive(Debug, Subcommand)]
enum ReputationCommand {
    Show { address: Option<String> },
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub cas_root: PathBuf,
    pub cas_endpoint: Option<String>,
    pub chain_file: PathBuf,
    pub registry_file: PathBuf,
    pub reputation_file: PathBuf,
    pub rules: RuleSet,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    cas_root: Option<PathBuf>,
    cas_endpoint: Option<String>,
    chain_file: Option<PathBuf>,
    registry_file: Option<PathBuf>,
    reputation_file: Option<PathBuf>,
    rules: Option<toml::Table>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

fn domain(e: impl Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

type CliResult = Result<(), CliError>;

/// Runs the CLI reading configuration from the process environment.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, &|k| std::env::var(k).ok(), out, err)
}

/// Runs the CLI with an explicit environment lookup.
pub fn run_with_env<I, T>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
            };
        }
    };
    let result = resolve_config(&cli.global, env).and_then(|config| dispatch(cli.command, &config, out, err));
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            let _ = writeln!(err, "run `govchain --help` for usage");
            2
        }
        Err(CliError::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn resolve_config(flags: &GlobalArgs, env: &dyn Fn(&str) -> Option<String>) -> Result<CliConfig, CliError> {
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None if Path::new(DEFAULT_CONFIG_FILE).is_file() => read_config_file(Path::new(DEFAULT_CONFIG_FILE))?,
        None => ConfigFile::default(),
    };
    let state = PathBuf::from(DEFAULT_STATE_DIR);
    let rules = match &file.rules {
        Some(table) => RuleSet::from_toml_table(table).map_err(usage)?,
        None => RuleSet::all(),
    };
    Ok(CliConfig {
        cas_root: flags
            .cas_root
            .clone()
            .or_else(|| env(ENV_CAS_ROOT).map(PathBuf::from))
            .or(file.cas_root)
            .unwrap_or_else(|| state.join("cas")),
        cas_endpoint: flags
            .cas_endpoint
            .clone()
            .or_else(|| env(ENV_CAS_ENDPOINT))
            .or(file.cas_endpoint),
        chain_file: flags
            .chain_file
            .clone()
            .or_else(|| env(ENV_CHAIN_FILE).map(PathBuf::from))
            .or(file.chain_file)
            .unwrap_or_else(|| state.join("chain.chain.jsonl")),
        registry_file: flags
            .registry_file
            .clone()
            .or(file.registry_file)
            .unwrap_or_else(|| state.join("registry.json")),
        reputation_file: flags
            .reputation_file
            .clone()
            .or(file.reputation_file)
            .unwrap_or_else(|| state.join("reputation.rep.json")),
        rules,
    })
}

fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn dispatch(command: Command, config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Hash { file } => {
            let bytes = read_file(&file)?;
            emit(out, &fingerprint(&bytes))
        }
        Command::Publish { file } => {
            let bytes = read_file(&file)?;
            let digest = open_store(config)?.put(&bytes).map_err(domain)?;
            emit(out, &digest)
        }
        Command::Fetch { digest, out: path } => {
            let digest = parse_digest(&digest)?;
            let content = match &config.cas_endpoint {
                Some(endpoint) => RemoteCas::new(endpoint.clone()).fetch(&digest),
                None => open_store(config)?.get(&digest),
            }
            .map_err(domain)?
            .ok_or_else(|| domain(format!("{digest} not found")))?;
            match path {
                Some(path) => write_file(&path, &content),
                None => out.write_all(&content).map_err(domain),
            }
        }
        Command::Scan { file } => scan(&file, out, err),
        Command::Template(TemplateCommand::Dao { out_dir }) => template_dao(out_dir.as_deref(), out),
        Command::Registry(cmd) => registry(cmd, config, out, err),
        Command::Deploy(args) => deploy(args, config, out),
        Command::Infer { this, other } => {
            let this = parse_address(&this)?;
            let other = parse_address(&other)?;
            let registry = load_registry(config)?;
            let mut env = load_chain(config)?;
            let decision = decide(&mut env, this, other, &registry).map_err(domain)?;
            env.seal_block();
            save_chain(config, &env)?;
            emit(out, &to_canonical_string(&decision).map_err(domain)?)
        }
        Command::Assess {
            other,
            this,
            out: report_path,
            expected_ontology,
        } => assess(config, &other, this.as_deref(), report_path, expected_ontology, out, err),
        Command::Chain(ChainCommand::Verify) => {
            let bytes = match fs::read(&config.chain_file) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
                Err(e) => return Err(domain(format!("{}: {e}", config.chain_file.display()))),
            };
            match verify_chain_encoded(&bytes) {
                ChainVerdict::Valid => {
                    let blocks = parse_chain_jsonl(&bytes).map_err(domain)?;
                    emit(out, &format!("valid {}", blocks.len()))
                }
                ChainVerdict::Invalid { index } => {
                    emit(out, &format!("invalid {index}"))?;
                    Err(domain(format!("chain is invalid at block {index}")))
                }
            }
        }
        Command::Reputation(ReputationCommand::Show { address }) => {
            let ledger = load_ledger(config)?;
            match address {
                Some(a) => {
                    let a = parse_address(&a)?;
                    let evidence = ledger.record(&a).map_or(0, |r| r.evidence.len());
                    emit(out, &format!("{a}\t{}\t{evidence}", status_name(ledger.status(&a))))
                }
                None => {
                    for (a, r) in &ledger.entries {
                        emit(out, &format!("{a}\t{}\t{}", status_name(r.status), r.evidence.len()))?;
                    }
                    Ok(())
                }
            }
        }
        Command::Serve { bind } => {
            let server = CasServer::bind(bind.as_str(), open_store(config)?).map_err(domain)?;
            let addr = server.local_addr().map_err(domain)?;
            let _ = writeln!(err, "serving {} on {addr}", config.cas_root.display());
            server.serve().map_err(domain)
        }
    }
}

fn emit(out: &mut dyn Write, line: &dyn Display) -> CliResult {
    writeln!(out, "{line}").map_err(domain)
}

fn status_name(s: crate::agent::Status) -> &'static str {
    match s {
        crate::agent::Status::Trusted => "trusted",
        crate::agent::Status::Flagged => "flagged",
        crate::agent::Status::Blacklisted => "blacklisted",
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| domain(format!("{}: {e}", path.display())))
}

/// Writes via a temporary file in the destination directory.
fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(domain)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(domain)?;
    tmp.write_all(bytes).map_err(domain)?;
    tmp.persist(path).map_err(|e| domain(e.error))?;
    Ok(())
}

fn parse_digest(s: &str) -> Result<Digest, CliError> {
    Digest::parse(s).map_err(|e| usage(format!("{s:?}: {e}")))
}

fn parse_address(s: &str) -> Result<Address, CliError> {
    s.parse().map_err(usage)
}

fn open_store(config: &CliConfig) -> Result<CasStore, CliError> {
    CasStore::open(&config.cas_root).map_err(domain)
}

fn load_chain(config: &CliConfig) -> Result<Environment, CliError> {
    match fs::read(&config.chain_file) {
        Ok(bytes) => {
            let blocks = parse_chain_jsonl(&bytes).map_err(domain)?;
            Environment::from_blocks(blocks).map_err(domain)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Environment::new()),
        Err(e) => Err(domain(format!("{}: {e}", config.chain_file.display()))),
    }
}

fn save_chain(config: &CliConfig, env: &Environment) -> CliResult {
    write_file(&config.chain_file, env.export_jsonl().as_bytes())
}

fn load_registry(config: &CliConfig) -> Result<TemplateRegistry, CliError> {
    match fs::read(&config.registry_file) {
        Ok(bytes) => TemplateRegistry::from_json_bytes(&bytes).map_err(domain),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(TemplateRegistry::new()),
        Err(e) => Err(domain(format!("{}: {e}", config.registry_file.display()))),
    }
}

fn load_ledger(config: &CliConfig) -> Result<ReputationLedger, CliError> {
    match fs::read(&config.reputation_file) {
        Ok(bytes) => ReputationLedger::from_json_bytes(&bytes).map_err(domain),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ReputationLedger::new()),
        Err(e) => Err(domain(format!("{}: {e}", config.reputation_file.display()))),
    }
}

fn scan(file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let bytes = read_file(file)?;
    let text = String::from_utf8(bytes).map_err(|_| domain(format!("{}: not UTF-8", file.display())))?;
    let annotated = match parse_annotations(&text) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_diagnostic());
            return Err(domain(format!("{}: {e}", file.display())));
        }
    };
    for d in &annotated.diagnostics {
        let _ = writeln!(err, "{d}");
    }
    emit(out, &format!("source {}", annotated.source_digest))?;
    for b in &annotated.bindings {
        let name = if b.entity_name.is_empty() { "-" } else { &b.entity_name };
        emit(out, &format!("binding {} {} {} {}", b.line, b.entity_kind, name, b.instance_digest))?;
    }
    Ok(())
}

fn template_dao(out_dir: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let bundle = standard_dao_bundle();
    let Some(dir) = out_dir else {
        return out.write_all(&bundle.model.canonicalize()).map_err(domain);
    };
    let mut files = vec![
        (format!("{}.gov.json", bundle.model.model_id()), bundle.model.canonicalize()),
        ("standard-ontology.onto.json".to_string(), bundle.ontology.canonicalize()),
        (format!("{}.sol", bundle.model.model_id()), bundle.source.as_bytes().to_vec()),
    ];
    for inst in &bundle.instances {
        files.push((format!("{}.inst.json", inst.role_or_power), inst.canonicalize()));
    }
    for (name, bytes) in files {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        emit(out, &format!("{} {}", fingerprint(&bytes), path.display()))?;
    }
    Ok(())
}

fn registry(cmd: RegistryCommand, config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mut registry = load_registry(config)?;
    match cmd {
        RegistryCommand::Add { file, name, policy, onto } => {
            let bytes = read_file(&file)?;
            let model = GovernanceModel::from_json_bytes(&bytes).map_err(domain)?;
            if model.canonicalize() != bytes {
                let _ = writeln!(
                    err,
                    "WARNING:0:{} is not in canonical form; disclosures must use digest {}",
                    file.display(),
                    model.fingerprint()
                );
            }
            let ontology_digest = match onto {
                Some(s) if Path::new(&s).is_file() => fingerprint(&read_file(Path::new(&s))?),
                Some(s) => parse_digest(&s)?,
                None if model.ontology_id() == STANDARD_ONTOLOGY_ID => standard_governance_ontology().fingerprint(),
                None => {
                    return Err(usage(format!(
                        "model uses ontology {:?}; pass --onto with its digest or file",
                        model.ontology_id()
                    )))
                }
            };
            let policy = match policy {
                PolicyArg::Accept => Policy::Accept,
                PolicyArg::Reject => Policy::Reject,
            };
            let key = registry.register(name.clone(), model, ontology_digest, policy);
            write_file(&config.registry_file, &registry.to_canonical_bytes())?;
            emit(out, &key)
        }
        RegistryCommand::List => {
            for (key, entry) in registry.iter() {
                let policy = match entry.policy {
                    Policy::Accept => "accept",
                    Policy::Reject => "reject",
                };
                emit(out, &format!("{key}\t{}\t{policy}\t{}", entry.name, entry.ontology_digest))?;
            }
            Ok(())
        }
    }
}

fn deploy(args: DeployArgs, config: &CliConfig, out: &mut dyn Write) -> CliResult {
    let disclosure = match (&args.gov, &args.onto, &args.src) {
        (Some(g), Some(o), Some(s)) => Some(Disclosure {
            governance_digest: parse_digest(g)?,
            ontology_digest: parse_digest(o)?,
            annotated_source_digest: parse_digest(s)?,
        }),
        (None, None, None) => None,
        _ => return Err(usage("--gov, --onto and --src must be given together")),
    };
    let known = args
        .knows
        .iter()
        .map(|pair| {
            let (g, o) = pair
                .split_once(':')
                .ok_or_else(|| usage(format!("--knows expects GOV:ONTO, got {pair:?}")))?;
            Ok(KnownTemplate {
                governance: parse_digest(g)?,
                ontology: parse_digest(o)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut env = load_chain(config)?;
    let address = env.deploy(disclosure, known);
    env.seal_block();
    save_chain(config, &env)?;
    emit(out, &address)
}

fn assess(
    config: &CliConfig,
    other: &str,
    this: Option<&str>,
    report_path: Option<PathBuf>,
    expected_ontology: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let other = parse_address(other)?;
    let caller = this.map(parse_address).transpose()?.unwrap_or(DEPLOYER);
    let expected = expected_ontology
        .map(|p| OntologyDocument::from_json_bytes(&read_file(&p)?).map_err(domain))
        .transpose()?;

    let mut env = load_chain(config)?;
    let mut read = |field| env.call_disclosure(caller, other, field);
    let disclosure = (|| {
        Ok::<_, crate::chain::ChainError>(Disclosure {
            governance_digest: read(DisclosureField::Governance)?,
            ontology_digest: read(DisclosureField::Ontology)?,
            annotated_source_digest: read(DisclosureField::AnnotatedSource)?,
        })
    })();
    env.seal_block();
    save_chain(config, &env)?;
    let disclosure = disclosure.map_err(domain)?;

    let mut resolver: Box<dyn ContentResolver> = match &config.cas_endpoint {
        Some(endpoint) => Box::new(RemoteCas::new(endpoint.clone())),
        None => Box::new(open_store(config)?),
    };
    let report = off_chain_assess(other, &disclosure, resolver.as_mut(), expected.as_ref(), &config.rules);
    let _ = write!(err, "{}", report.render());

    let path = report_path.unwrap_or_else(|| {
        config
            .reputation_file
            .parent()
            .unwrap_or(Path::new("."))
            .join("reports")
            .join(format!("{other}.risk.json"))
    });
    write_file(&path, &report.canonicalize())?;

    let mut ledger = load_ledger(config)?;
    let status = ledger.apply(other, &report);
    write_file(&config.reputation_file, &ledger.to_canonical_bytes())?;
    let _ = writeln!(err, "reputation of {other}: {}", status_name(status));

    emit(out, &String::from_utf8(report.canonicalize()).map_err(domain)?)
}
