#![allow(dead_code)]

pub mod sha256_oracle;

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener};
use std::path::Path;
use std::thread;

use govchain::annotation::InstanceDocument;
use govchain::bundle::{instance_for, DocumentBundle};
use govchain::cas::{CasStore, ContentResolver};
use govchain::governance::{
    standard_governance_ontology, Cardinality, GovernanceModel, Power, Relation, RelationKind, Role,
    STANDARD_ONTOLOGY_ID,
};
use govchain::Digest;
use proptest::prelude::*;

pub const GOLDEN_DAO_DIGEST: &str = include_str!("../golden/standard-dao.sha256");
pub const GOLDEN_DAO_JSON: &[u8] = include_bytes!("../golden/standard-dao.gov.json");

pub const STANDARD_DAO_HASH: &str = "0x56B3CAEC460654DF16232C6207DFF138807401A2D439366BFEB80E981C1410BF";
pub const STANDARD_ONTOLOGY_HASH: &str = "0x329A16326F27E5C96A45BC1DDA19C49C18ED32593E868F7B2534CDAE3A0A0665";
pub const ANNOTATED_SOURCE_HASH: &str = "0x0F9E141DA2589A9EE28BC3F825E03D08F8F69F5AA9530ED485E5A19904C52579";
pub const CURATOR_SNIPPET: &str = "/** @ontoInstance 0x5C15E9701E5B866B92C31EE4CB0CDD767024A9091DB39045310E1FB376DB1A65 */\naddress curator;\n//Doxygen style annotation of \"curator\" address within the smart contract\n";
pub const CURATOR_INSTANCE_DIGEST: &str = "5c15e9701e5b866b92c31ee4cb0cdd767024a9091db39045310e1fb376db1a65";

pub fn golden_dao_digest() -> Digest {
    Digest::parse(GOLDEN_DAO_DIGEST.trim()).unwrap()
}

pub fn role(name: &str, cardinality: Cardinality) -> Role {
    Role {
        name: name.into(),
        description: format!("{name} role"),
        acquisition: "assigned".into(),
        cardinality,
    }
}

pub fn power(name: &str, holder: &str, target: &str, constraints: &[&str]) -> Power {
    Power {
        name: name.into(),
        holder: holder.into(),
        target: target.into(),
        effect: format!("exercise {name}"),
        constraints: constraints.iter().map(|c| c.to_string()).collect(),
    }
}

/// One owner holding every power, nothing checking it.
pub fn single_owner_model() -> GovernanceModel {
    GovernanceModel::new(
        "single-owner",
        STANDARD_ONTOLOGY_ID,
        vec![role("owner", Cardinality::One)],
        vec![
            power("withdraw", "owner", "contract funds", &[]),
            power("set-quorum", "owner", "voting quorum", &[]),
        ],
        vec![],
    )
    .unwrap()
}

/// Committee whose single admin is checked by the members' veto and
/// whose quorum is set by the many-holder members role.
pub fn checked_committee_model() -> GovernanceModel {
    GovernanceModel::new(
        "checked-committee",
        STANDARD_ONTOLOGY_ID,
        vec![role("admin", Cardinality::One), role("member", Cardinality::Many)],
        vec![
            power("pause", "admin", "contract execution", &[]),
            power("set-quorum", "member", "voting quorum", &["requires a two-thirds vote"]),
            power("veto", "member", "admin actions", &["requires a majority vote"]),
        ],
        vec![Relation {
            kind: RelationKind::Checks,
            from_role: "member".into(),
            to_role: "admin".into(),
            via_power: "veto".into(),
        }],
    )
    .unwrap()
}

/// Annotated source binding each `(declaration, instance)` pair.
pub fn annotated_source(decls: &[(&str, &InstanceDocument)]) -> String {
    let mut src = String::from("pragma solidity ^0.4.4;\n\ncontract Fixture {\n");
    for (decl, inst) in decls {
        src.push_str(&format!("    /** @ontoInstance 0x{} */\n    {decl}\n\n", inst.fingerprint()));
    }
    src.push_str("}\n");
    src
}

pub fn checked_committee_bundle() -> DocumentBundle {
    let model = checked_committee_model();
    let admin = instance_for(&model, "admin", "single administrator");
    let member = instance_for(&model, "member", "committee members");
    let source = annotated_source(&[
        ("address public admin;", &admin),
        ("mapping (address => bool) public members;", &member),
    ]);
    DocumentBundle {
        model,
        ontology: standard_governance_ontology(),
        instances: vec![admin, member],
        source,
    }
}

pub fn publish_all(store: &CasStore, bundle: &DocumentBundle) {
    for (digest, bytes) in bundle.documents() {
        assert_eq!(store.put(&bytes).unwrap(), digest);
    }
}

pub fn temp_store() -> (tempfile::TempDir, CasStore) {
    let dir = tempfile::tempdir().unwrap();
    let store = CasStore::open(dir.path().join("cas")).unwrap();
    (dir, store)
}

/// Counts every resolution attempt.
pub struct CountingResolver<R> {
    pub inner: R,
    pub calls: usize,
}

impl<R> CountingResolver<R> {
    pub fn new(inner: R) -> Self {
        Self { inner, calls: 0 }
    }
}

impl<R: ContentResolver> ContentResolver for CountingResolver<R> {
    fn resolve(&mut self, digest: &Digest) -> Option<Vec<u8>> {
        self.calls += 1;
        self.inner.resolve(digest)
    }
}

/// A server speaking the fetch protocol that answers every request with
/// `payload`, whatever digest was asked for.
pub fn lying_server(payload: Vec<u8>) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { return };
            let mut line = String::new();
            let _ = BufReader::new(stream.try_clone().unwrap()).read_line(&mut line);
            let _ = stream.write_all(format!("OK {}\n", payload.len()).as_bytes());
            let _ = stream.write_all(&payload);
        }
    });
    addr
}

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-zA-Z0-9-]{0,8}"
}

fn text() -> impl Strategy<Value = String> {
    "[ -~]{0,16}"
}

fn cardinality() -> impl Strategy<Value = Cardinality> {
    prop_oneof![Just(Cardinality::One), Just(Cardinality::Many)]
}

fn relation_kind() -> impl Strategy<Value = RelationKind> {
    prop_oneof![
        Just(RelationKind::Checks),
        Just(RelationKind::Delegates),
        Just(RelationKind::Appoints)
    ]
}

/// Valid models with 1..5 roles, 0..6 powers and 0..5 relations.
pub fn arb_model() -> impl Strategy<Value = GovernanceModel> {
    (
        ident(),
        ident(),
        prop::collection::btree_set(ident(), 1..5),
        prop::collection::btree_set(ident(), 0..6),
    )
        .prop_flat_map(|(model_id, ontology_id, role_names, power_names)| {
            let role_names: Vec<String> = role_names.into_iter().collect();
            let power_names: Vec<String> = power_names.into_iter().collect();
            let nroles = role_names.len();
            let npowers = power_names.len();
            let roles = prop::collection::vec((text(), text(), cardinality()), nroles);
            let powers = prop::collection::vec(
                (0..nroles, text(), text(), prop::collection::vec(text(), 0..3)),
                npowers,
            );
            let relations = if npowers == 0 {
                Just(Vec::new()).boxed()
            } else {
                prop::collection::vec((relation_kind(), 0..nroles, 0..nroles, 0..npowers), 0..5).boxed()
            };
            (
                Just(model_id),
                Just(ontology_id),
                Just(role_names),
                Just(power_names),
                roles,
                powers,
                relations,
            )
        })
        .prop_map(|(model_id, ontology_id, role_names, power_names, roles, powers, relations)| {
            let roles = role_names
                .iter()
                .zip(roles)
                .map(|(name, (description, acquisition, cardinality))| Role {
                    name: name.clone(),
                    description,
                    acquisition,
                    cardinality,
                })
                .collect();
            let powers = power_names
                .iter()
                .zip(powers)
                .map(|(name, (holder, target, effect, constraints))| Power {
                    name: name.clone(),
                    holder: role_names[holder].clone(),
                    target,
                    effect,
                    constraints,
                })
                .collect();
            let relations = relations
                .into_iter()
                .map(|(kind, from, to, via)| Relation {
                    kind,
                    from_role: role_names[from].clone(),
                    to_role: role_names[to].clone(),
                    via_power: power_names[via].clone(),
                })
                .collect();
            GovernanceModel::new(model_id, ontology_id, roles, powers, relations).unwrap()
        })
}

/// Rebuilds `model` from reversed and rotated entry lists.
pub fn permuted(model: &GovernanceModel, rotate: usize) -> GovernanceModel {
    fn shuffle<T: Clone>(items: &[T], rotate: usize) -> Vec<T> {
        let mut v: Vec<T> = items.iter().rev().cloned().collect();
        if !v.is_empty() {
            let k = rotate % v.len();
            v.rotate_left(k);
        }
        v
    }
    GovernanceModel::new(
        model.model_id(),
        model.ontology_id(),
        shuffle(model.roles(), rotate),
        shuffle(model.powers(), rotate / 2 + 1),
        shuffle(model.relations(), rotate / 3 + 2),
    )
    .unwrap()
}

/// Every distinct single-field mutation of `model` that keeps it valid.
pub fn single_field_mutations(model: &GovernanceModel) -> Vec<GovernanceModel> {
    let rebuild = |model_id: &str, ontology_id: &str, roles: Vec<Role>, powers: Vec<Power>, relations: Vec<Relation>| {
        GovernanceModel::new(model_id, ontology_id, roles, powers, relations).ok()
    };
    let (mid, oid) = (model.model_id(), model.ontology_id());
    let roles = model.roles().to_vec();
    let powers = model.powers().to_vec();
    let relations = model.relations().to_vec();
    let mut out = Vec::new();
    out.extend(rebuild(&format!("{mid}'"), oid, roles.clone(), powers.clone(), relations.clone()));
    out.extend(rebuild(mid, &format!("{oid}'"), roles.clone(), powers.clone(), relations.clone()));
    for i in 0..roles.len() {
        let mut r = roles.clone();
        r[i].description.push('!');
        out.extend(rebuild(mid, oid, r, powers.clone(), relations.clone()));
        let mut r = roles.clone();
        r[i].acquisition.push('!');
        out.extend(rebuild(mid, oid, r, powers.clone(), relations.clone()));
        let mut r = roles.clone();
        r[i].cardinality = match r[i].cardinality {
            Cardinality::One => Cardinality::Many,
            Cardinality::Many => Cardinality::One,
        };
        out.extend(rebuild(mid, oid, r, powers.clone(), relations.clone()));
    }
    for i in 0..powers.len() {
        let mut p = powers.clone();
        p[i].target.push('!');
        out.extend(rebuild(mid, oid, roles.clone(), p, relations.clone()));
        let mut p = powers.clone();
        p[i].effect.push('!');
        out.extend(rebuild(mid, oid, roles.clone(), p, relations.clone()));
        let mut p = powers.clone();
        p[i].constraints.push("extra".into());
        out.extend(rebuild(mid, oid, roles.clone(), p, relations.clone()));
        if roles.len() > 1 {
            let mut p = powers.clone();
            let cur = roles.iter().position(|r| r.name == p[i].holder).unwrap();
            p[i].holder = roles[(cur + 1) % roles.len()].name.clone();
            out.extend(rebuild(mid, oid, roles.clone(), p, relations.clone()));
        }
    }
    for i in 0..relations.len() {
        let mut r = relations.clone();
        r[i].kind = match r[i].kind {
            RelationKind::Checks => RelationKind::Delegates,
            RelationKind::Delegates => RelationKind::Appoints,
            RelationKind::Appoints => RelationKind::Checks,
        };
        out.extend(rebuild(mid, oid, roles.clone(), powers.clone(), r));
    }
    // A mutation may collapse two relations into one via dedup; keep only
    // genuinely different records.
    out.retain(|m| m != model);
    out
}

/// Runs the CLI in-process with every state path under `dir` and no
/// environment. Returns (exit code, stdout, stderr).
pub fn cli(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let mut argv: Vec<String> = vec!["govchain".into()];
    for (flag, name) in [
        ("--cas-root", "cas"),
        ("--chain-file", "chain.jsonl"),
        ("--registry-file", "registry.json"),
        ("--reputation-file", "reputation.json"),
    ] {
        argv.push(flag.into());
        argv.push(p(name));
    }
    argv.extend(args.iter().map(|a| a.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = govchain::cli::run_with_env(argv, &|_| None, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn cli_ok(dir: &Path, args: &[&str]) -> String {
    let (code, out, err) = cli(dir, args);
    assert_eq!(code, 0, "govchain {args:?} failed: {err}");
    out
}

/// The end-to-end demo: publish the DAO bundle, register it, deploy a
/// familiar contract and an unfamiliar one, infer, assess and verify.
/// Returns the (infer, assess, verify) outputs.
pub fn run_demo(dir: &Path) -> (String, String, String) {
    let bundle = dir.join("bundle");
    let bundle_s = bundle.to_string_lossy().into_owned();
    cli_ok(dir, &["template", "dao", "--out-dir", &bundle_s]);
    let file = |name: &str| bundle.join(name).to_string_lossy().into_owned();
    let publish = |name: &str| cli_ok(dir, &["publish", &file(name)]).trim().to_string();
    let gov = publish("standard-dao.gov.json");
    let onto = publish("standard-ontology.onto.json");
    let src = publish("standard-dao.sol");
    for entry in std::fs::read_dir(&bundle).unwrap() {
        let path = entry.unwrap().path();
        if path.to_string_lossy().ends_with(".inst.json") {
            cli_ok(dir, &["publish", &path.to_string_lossy()]);
        }
    }
    cli_ok(dir, &["registry", "add", &file("standard-dao.gov.json"), "--name", "standard-dao", "--policy", "accept"]);
    let me = cli_ok(dir, &["deploy", "--knows", &format!("{gov}:{onto}")]).trim().to_string();
    let other = cli_ok(dir, &["deploy", "--gov", &gov, "--onto", &onto, "--src", &src]).trim().to_string();
    let infer = cli_ok(dir, &["infer", "--self", &me, "--other", &other]);
    let assess = cli_ok(dir, &["assess", "--other", &other]);
    let verify = cli_ok(dir, &["chain", "verify"]);
    (infer, assess, verify)
}
