//! Analysis driver: fragment dispatch, backend selection, the optional
//! state-space oracle, and report assembly.
//!
//! The driver owns every policy decision the rule systems don't:
//! which framework analyses a term (the sharper finite-state rules when
//! the shape allows, the general rules otherwise), which set-family
//! backend to use (bit tables for small alphabets, decision diagrams for
//! large ones), time limits, and the shape of the machine-readable
//! report. Reports are deterministic — two runs over the same input
//! serialize identically outside the `timing` block.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::general::{analyze_general, fair_sets, guard_sets, GeneralError, RuleContext};
use crate::general::{contractive_sets, nonexpansive_sets};
use crate::semantics::{build_lts, check_divergence, LtsOptions, OracleVerdict};
use crate::setlogic::{
    Alphabet, BackendKind, BddBackend, EventSet, ExplicitBackend, FamilyBackend, FamilyError,
    PairFamily, SetFamily,
};
use crate::sfs::{sfs_delta_phi, SfsError};
use crate::syntax::{bekic_elaborate, classify, display_term, is_sfs, ProcessClass, Spec, Term};

/// Which rule system to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Finite-state rules when the term's shape allows, general otherwise.
    #[default]
    Auto,
    Sfs,
    General,
}

/// Which set-family engine to run the rules on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BackendChoice {
    /// Bit tables up to 12 events, decision diagrams beyond.
    #[default]
    Auto,
    Explicit,
    Symbolic,
}

#[derive(Clone, Debug)]
pub struct AnalyzeConfig {
    pub mode: Mode,
    pub backend: BackendChoice,
    /// Also explore the state space (bounded) and report ground truth.
    pub oracle: bool,
    pub oracle_max_states: usize,
    /// Run both backends concurrently and insist they agree.
    pub verify_race: bool,
    pub timeout: Duration,
    /// Attach per-node family dumps to the report.
    pub debug_families: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            mode: Mode::Auto,
            backend: BackendChoice::Auto,
            oracle: false,
            oracle_max_states: 100_000,
            verify_race: false,
            timeout: Duration::from_secs(60),
            debug_families: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    LivelockFree,
    Inconclusive,
    /// Only the oracle may say this; the static frameworks never prove
    /// divergence, they only fail to prove its absence.
    Divergent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameworkTag {
    Sfs,
    General,
    Oracle,
}

/// A fair-set pair in event names: if the environment keeps `assumes`
/// live, the process keeps `performs` live.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairWitness {
    pub assumes: Vec<String>,
    pub performs: Vec<String>,
}

/// One row of a certificate's per-node table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertNode {
    pub path: String,
    pub term: String,
    /// The finite-state framework's divergence bit; absent for the
    /// general framework's rows.
    pub delta: Option<bool>,
    /// Family members at this node, as (first, second) name lists —
    /// fingerprints (live, banned) or fair pairs (assumed, performed).
    pub members: Vec<(Vec<String>, Vec<String>)>,
    pub truncated: bool,
    pub note: Option<String>,
}

/// Everything needed to re-check a `LivelockFree` verdict without
/// rerunning the analysis: the per-node families and the closing witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub framework: FrameworkTag,
    pub note: Option<String>,
    pub fair_witness: Option<FairWitness>,
    pub nodes: Vec<CertNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub framework: FrameworkTag,
    pub reason: Option<String>,
    pub certificate: Option<Certificate>,
}

/// Family members of one analysed node, for `--debug-families`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyDump {
    pub sets: Vec<Vec<String>>,
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebugNode {
    pub path: String,
    pub term: String,
    pub delta: Option<bool>,
    pub families: BTreeMap<String, FamilyDump>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub verdict: Verdict,
    pub states: usize,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaceReport {
    pub agreed: bool,
    /// Verdict kind per backend name.
    pub verdicts: BTreeMap<String, String>,
}

/// Wall-clock data; excluded from determinism guarantees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: u64,
    /// Race mode: which backend answered first.
    pub first_verdict_from: Option<String>,
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub root: String,
    pub alphabet: Vec<String>,
    pub classification: String,
    pub mode: String,
    pub backend: String,
    pub verdict: Verdict,
    pub oracle: Option<OracleReport>,
    pub race: Option<RaceReport>,
    pub debug: Option<Vec<DebugNode>>,
    pub timing: Timing,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("the finite-state rules need a structurally finite-state process; this one is {class}")]
    ModeMismatch { class: String },
    #[error("backend race needs both backends; {n} events exceed the explicit engine's range")]
    RaceUnavailable { n: usize },
    #[error("analysis timed out after {0:?}")]
    Timeout(Duration),
    #[error("analysis worker failed without an answer")]
    WorkerFailed,
    #[error("soundness check failed: {0}")]
    Unsound(String),
    #[error("only LivelockFree verdicts carry a certificate")]
    NoCertificate,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Sfs(#[from] SfsError),
    #[error(transparent)]
    General(#[from] GeneralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ModeUsed {
    Sfs,
    General,
}

impl ModeUsed {
    fn tag(self) -> FrameworkTag {
        match self {
            ModeUsed::Sfs => FrameworkTag::Sfs,
            ModeUsed::General => FrameworkTag::General,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeUsed::Sfs => "sfs",
            ModeUsed::General => "general",
        }
    }
}

fn backend_name(kind: BackendKind) -> &'static str {
    match kind {
        BackendKind::Explicit => "explicit",
        BackendKind::Symbolic => "symbolic",
    }
}

/// Largest alphabet the explicit backend serves by default; beyond this
/// the automatic choice switches to decision diagrams.
const EXPLICIT_AUTO_LIMIT: usize = 12;
/// Hard envelope of the explicit backend's pair tables.
const EXPLICIT_HARD_LIMIT: usize = 13;

/// Analyze one specification end to end.
pub fn analyze_spec(spec: &Spec, config: &AnalyzeConfig) -> Result<Report, AnalyzeError> {
    let started = Instant::now();
    let t = bekic_elaborate(spec);
    let n = spec.alphabet.size();
    let class = classify(&t).expect("elaborated terms are closed");
    let mode = resolve_mode(config.mode, class, &t)?;

    let (verdict, debug, race, first_from, backend_label) = if config.verify_race {
        run_race(&t, spec, mode, n, config)?
    } else {
        let kind = resolve_backend(config.backend, n);
        let (verdict, debug) = run_with_deadline(&t, spec, mode, kind, config)?;
        (
            verdict,
            debug,
            None,
            Some(backend_name(kind).to_string()),
            backend_name(kind).to_string(),
        )
    };

    let oracle = config
        .oracle
        .then(|| run_oracle(&t, &spec.alphabet, config.oracle_max_states));
    if let Some(o) = &oracle {
        if verdict.kind == VerdictKind::LivelockFree && o.verdict.kind == VerdictKind::Divergent {
            return Err(AnalyzeError::Unsound(format!(
                "static certificate for {} contradicted by divergence witness: {}",
                spec.root,
                o.verdict.reason.as_deref().unwrap_or("(none)"),
            )));
        }
    }

    Ok(Report {
        schema_version: SCHEMA_VERSION,
        root: spec.root.clone(),
        alphabet: spec.alphabet.names().to_vec(),
        classification: class.to_string(),
        mode: mode.name().to_string(),
        backend: backend_label,
        verdict,
        oracle,
        race,
        debug,
        timing: Timing {
            total_ms: started.elapsed().as_millis() as u64,
            first_verdict_from: first_from,
        },
    })
}

pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

fn resolve_mode(mode: Mode, class: ProcessClass, t: &Term) -> Result<ModeUsed, AnalyzeError> {
    match mode {
        Mode::Auto => Ok(if is_sfs(t) {
            ModeUsed::Sfs
        } else {
            ModeUsed::General
        }),
        Mode::General => Ok(ModeUsed::General),
        Mode::Sfs => {
            // A term with DIV short-circuits to Inconclusive in any mode,
            // so forcing sfs on it is allowed.
            if is_sfs(t) || t.contains_div() {
                Ok(ModeUsed::Sfs)
            } else {
                Err(AnalyzeError::ModeMismatch {
                    class: class.to_string(),
                })
            }
        }
    }
}

fn resolve_backend(choice: BackendChoice, n: usize) -> BackendKind {
    match choice {
        BackendChoice::Explicit => BackendKind::Explicit,
        BackendChoice::Symbolic => BackendKind::Symbolic,
        BackendChoice::Auto => {
            if n > EXPLICIT_AUTO_LIMIT {
                BackendKind::Symbolic
            } else {
                BackendKind::Explicit
            }
        }
    }
}

type WorkerAnswer = Result<(Verdict, Option<Vec<DebugNode>>), AnalyzeError>;

/// Run one worker under the configured timeout.
fn run_with_deadline(
    t: &Term,
    spec: &Spec,
    mode: ModeUsed,
    kind: BackendKind,
    config: &AnalyzeConfig,
) -> WorkerAnswer {
    let (tx, rx) = mpsc::channel::<WorkerAnswer>();
    spawn_worker(t, spec, mode, kind, config.debug_families, tx);
    match rx.recv_timeout(config.timeout) {
        Ok(answer) => answer,
        Err(mpsc::RecvTimeoutError::Timeout) => Err(AnalyzeError::Timeout(config.timeout)),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(AnalyzeError::WorkerFailed),
    }
}

/// Run both backends concurrently; the first answer is the one the caller
/// waited for, but agreement of both is mandatory. The report's verdict
/// (certificate included) is always the explicit engine's, keeping
/// reports deterministic while still recording who won the race.
#[allow(clippy::type_complexity)]
fn run_race(
    t: &Term,
    spec: &Spec,
    mode: ModeUsed,
    n: usize,
    config: &AnalyzeConfig,
) -> Result<
    (
        Verdict,
        Option<Vec<DebugNode>>,
        Option<RaceReport>,
        Option<String>,
        String,
    ),
    AnalyzeError,
> {
    if n > EXPLICIT_HARD_LIMIT {
        return Err(AnalyzeError::RaceUnavailable { n });
    }
    let deadline = Instant::now() + config.timeout;
    let (tx, rx) = mpsc::channel::<(BackendKind, WorkerAnswer)>();
    for kind in [BackendKind::Explicit, BackendKind::Symbolic] {
        let tagged = tx.clone();
        let (inner_tx, inner_rx) = mpsc::channel::<WorkerAnswer>();
        spawn_worker(t, spec, mode, kind, config.debug_families, inner_tx);
        std::thread::spawn(move || {
            if let Ok(answer) = inner_rx.recv() {
                let _ = tagged.send((kind, answer));
            }
        });
    }
    drop(tx);

    let mut answers: Vec<(BackendKind, (Verdict, Option<Vec<DebugNode>>))> = Vec::new();
    let mut first_from = None;
    while answers.len() < 2 {
        let remaining = deadline
            .checked_duration_since(Instant::now())
            .ok_or(AnalyzeError::Timeout(config.timeout))?;
        match rx.recv_timeout(remaining) {
            Ok((kind, answer)) => {
                let payload = answer?;
                if first_from.is_none() {
                    first_from = Some(backend_name(kind).to_string());
                }
                answers.push((kind, payload));
            }
            Err(mpsc::RecvTimeoutError::Timeout) => {
                return Err(AnalyzeError::Timeout(config.timeout))
            }
            Err(mpsc::RecvTimeoutError::Disconnected) => return Err(AnalyzeError::WorkerFailed),
        }
    }

    let verdict_of = |want: BackendKind| {
        answers
            .iter()
            .find(|(k, _)| *k == want)
            .map(|(_, payload)| payload.clone())
            .expect("both backends answered")
    };
    let (explicit_verdict, explicit_debug) = verdict_of(BackendKind::Explicit);
    let (symbolic_verdict, _) = verdict_of(BackendKind::Symbolic);

    let agreed = explicit_verdict.kind == symbolic_verdict.kind
        && explicit_verdict.reason == symbolic_verdict.reason;
    if !agreed {
        return Err(AnalyzeError::Unsound(format!(
            "backend race disagreed: explicit {:?} ({:?}) vs symbolic {:?} ({:?})",
            explicit_verdict.kind,
            explicit_verdict.reason,
            symbolic_verdict.kind,
            symbolic_verdict.reason,
        )));
    }
    let race = RaceReport {
        agreed,
        verdicts: answers
            .iter()
            .map(|(k, (v, _))| {
                (
                    backend_name(*k).to_string(),
                    format!("{:?}", v.kind).to_lowercase(),
                )
            })
            .collect(),
    };
    Ok((
        explicit_verdict,
        explicit_debug,
        Some(race),
        first_from,
        "race".to_string(),
    ))
}

fn spawn_worker(
    t: &Term,
    spec: &Spec,
    mode: ModeUsed,
    kind: BackendKind,
    debug: bool,
    tx: mpsc::Sender<WorkerAnswer>,
) {
    let t = t.clone();
    let alphabet = spec.alphabet.clone();
    std::thread::spawn(move || {
        let answer = run_one(&t, &alphabet, mode, kind, debug);
        let _ = tx.send(answer);
    });
}

fn run_one(
    t: &Term,
    alphabet: &Alphabet,
    mode: ModeUsed,
    kind: BackendKind,
    debug: bool,
) -> WorkerAnswer {
    let n = alphabet.size();
    match kind {
        BackendKind::Explicit => {
            let mut be = ExplicitBackend::new(n)?;
            run_in(t, alphabet, mode, &mut be, debug)
        }
        BackendKind::Symbolic => {
            let mut be = BddBackend::new(n);
            run_in(t, alphabet, mode, &mut be, debug)
        }
    }
}

fn run_in(
    t: &Term,
    alphabet: &Alphabet,
    mode: ModeUsed,
    be: &mut dyn FamilyBackend,
    debug: bool,
) -> WorkerAnswer {
    if t.contains_div() {
        let verdict = Verdict {
            kind: VerdictKind::Inconclusive,
            framework: mode.tag(),
            reason: Some("contains DIV".to_string()),
            certificate: None,
        };
        return Ok((verdict, debug.then(Vec::new)));
    }
    match mode {
        ModeUsed::Sfs => {
            let analysis = sfs_delta_phi(t, alphabet, be)?;
            let dump = debug.then(|| {
                analysis
                    .nodes
                    .iter()
                    .map(|nr| DebugNode {
                        path: nr.path.clone(),
                        term: nr.term.clone(),
                        delta: Some(nr.delta),
                        families: BTreeMap::from([(
                            "phi".to_string(),
                            FamilyDump {
                                sets: Vec::new(),
                                pairs: pair_names(&nr.phi_sample, alphabet),
                                truncated: nr.truncated,
                            },
                        )]),
                    })
                    .collect::<Vec<_>>()
            });
            let verdict = if analysis.is_livelock_free() {
                Verdict {
                    kind: VerdictKind::LivelockFree,
                    framework: FrameworkTag::Sfs,
                    reason: None,
                    certificate: Some(Certificate {
                        framework: FrameworkTag::Sfs,
                        note: Some(
                            "no node can diverge; fingerprints listed per node".to_string(),
                        ),
                        fair_witness: None,
                        nodes: analysis
                            .nodes
                            .iter()
                            .map(|nr| CertNode {
                                path: nr.path.clone(),
                                term: nr.term.clone(),
                                delta: Some(nr.delta),
                                members: pair_names(&nr.phi_sample, alphabet),
                                truncated: nr.truncated,
                                note: None,
                            })
                            .collect(),
                    }),
                }
            } else {
                let origin = analysis
                    .first_divergent
                    .clone()
                    .unwrap_or_else(|| "root".to_string());
                Verdict {
                    kind: VerdictKind::Inconclusive,
                    framework: FrameworkTag::Sfs,
                    reason: Some(format!("delta true at {origin}")),
                    certificate: None,
                }
            };
            Ok((verdict, dump))
        }
        ModeUsed::General => {
            let normalized = t.alpha_normalize();
            let mut ctx = RuleContext::new(be);
            let outcome = analyze_general(&normalized, &mut ctx)?;
            let livelock_free = outcome.is_livelock_free();
            let mut cert_nodes = Vec::new();
            let mut debug_nodes = Vec::new();
            if livelock_free || debug {
                let mut scope = Vec::new();
                walk_general(
                    &normalized,
                    "root".to_string(),
                    &mut ctx,
                    alphabet,
                    debug,
                    &mut scope,
                    &mut cert_nodes,
                    &mut debug_nodes,
                )?;
                truncate_nodes(&mut cert_nodes);
            }
            let verdict = if let Some((u, v)) = outcome.witness {
                Verdict {
                    kind: VerdictKind::LivelockFree,
                    framework: FrameworkTag::General,
                    reason: None,
                    certificate: Some(Certificate {
                        framework: FrameworkTag::General,
                        note: Some("non-empty fair-set family at the root".to_string()),
                        fair_witness: Some(FairWitness {
                            assumes: set_names(u, alphabet),
                            performs: set_names(v, alphabet),
                        }),
                        nodes: cert_nodes,
                    }),
                }
            } else {
                Verdict {
                    kind: VerdictKind::Inconclusive,
                    framework: FrameworkTag::General,
                    reason: outcome.reason,
                    certificate: None,
                }
            };
            Ok((verdict, debug.then_some(debug_nodes)))
        }
    }
}

const CERT_NODE_CAP: usize = 200;
const CERT_MEMBER_CAP: usize = 8;
const DEBUG_MEMBER_CAP: usize = 32;

fn truncate_nodes(nodes: &mut Vec<CertNode>) {
    if nodes.len() > CERT_NODE_CAP {
        let elided = nodes.len() - CERT_NODE_CAP;
        nodes.truncate(CERT_NODE_CAP);
        nodes.push(CertNode {
            path: "…".to_string(),
            term: format!("({elided} more nodes elided)"),
            delta: None,
            members: Vec::new(),
            truncated: true,
            note: None,
        });
    }
}

fn set_names(s: EventSet, alphabet: &Alphabet) -> Vec<String> {
    alphabet
        .iter_ids()
        .filter(|&a| s.contains(a))
        .map(|a| alphabet.name(a).to_string())
        .collect()
}

fn pair_names(
    pairs: &[(EventSet, EventSet)],
    alphabet: &Alphabet,
) -> Vec<(Vec<String>, Vec<String>)> {
    pairs
        .iter()
        .map(|&(u, v)| (set_names(u, alphabet), set_names(v, alphabet)))
        .collect()
}

fn dump_pairs(
    ctx: &mut RuleContext,
    fam: &PairFamily,
    cap: usize,
) -> Result<(Vec<(EventSet, EventSet)>, bool), FamilyError> {
    match ctx.backend().pf_enumerate(fam, cap) {
        Ok(members) => Ok((members, false)),
        Err(FamilyError::CapExceeded { .. }) => {
            let w = ctx.backend().pf_witness(fam)?;
            Ok((w.into_iter().collect(), true))
        }
        Err(e) => Err(e),
    }
}

fn dump_sets(
    ctx: &mut RuleContext,
    fam: &SetFamily,
    cap: usize,
) -> Result<(Vec<EventSet>, bool), FamilyError> {
    match ctx.backend().sf_enumerate(fam, cap) {
        Ok(members) => Ok((members, false)),
        Err(FamilyError::CapExceeded { .. }) => {
            let w = ctx.backend().sf_witness(fam)?;
            Ok((w.into_iter().collect(), true))
        }
        Err(e) => Err(e),
    }
}

/// Post-order walk of a (normalized, DIV-free) term, collecting the
/// certificate's fair-family rows and, when asked, the full family dump.
#[allow(clippy::too_many_arguments)]
fn walk_general(
    t: &Term,
    path: String,
    ctx: &mut RuleContext,
    alphabet: &Alphabet,
    want_debug: bool,
    scope: &mut Vec<String>,
    cert: &mut Vec<CertNode>,
    debug: &mut Vec<DebugNode>,
) -> Result<(), FamilyError> {
    let child = |i: usize| format!("{path}.{i}");
    match t {
        Term::Prefix(_, p) | Term::Hide(p, _) | Term::Rename(p, _) => {
            walk_general(p, child(0), ctx, alphabet, want_debug, scope, cert, debug)?;
        }
        Term::IntChoice(p, q)
        | Term::ExtChoice(p, q)
        | Term::Parallel(p, _, q)
        | Term::Seq(p, q) => {
            walk_general(p, child(0), ctx, alphabet, want_debug, scope, cert, debug)?;
            walk_general(q, child(1), ctx, alphabet, want_debug, scope, cert, debug)?;
        }
        Term::Mu(x, p) => {
            scope.push(x.clone());
            walk_general(p, child(0), ctx, alphabet, want_debug, scope, cert, debug)?;
            scope.pop();
        }
        Term::Stop | Term::Skip | Term::Var(_) | Term::Div => {}
    }

    let fair = fair_sets(t, ctx)?;
    let (members, truncated) = dump_pairs(ctx, &fair, CERT_MEMBER_CAP)?;
    let note = if let Term::Mu(x, p) = t {
        // The self-supporting set that closes the recursion.
        let c = contractive_sets(p, x, ctx)?;
        let f = fair_sets(p, ctx)?;
        let both = ctx.backend().pf_intersect(&c, &f)?;
        let diag = ctx.backend().pf_diag_sets(&both)?;
        ctx.backend().sf_witness(&diag)?.map(|w| {
            format!(
                "recursion sustained by {{{}}}",
                set_names(w, alphabet).join(", ")
            )
        })
    } else {
        None
    };
    cert.push(CertNode {
        path: path.clone(),
        term: display_term(t, alphabet).to_string(),
        delta: None,
        members: pair_names(&members, alphabet),
        truncated,
        note,
    });

    if want_debug {
        let mut families = BTreeMap::new();
        let (fair_members, fair_trunc) = dump_pairs(ctx, &fair, DEBUG_MEMBER_CAP)?;
        families.insert(
            "fair".to_string(),
            FamilyDump {
                sets: Vec::new(),
                pairs: pair_names(&fair_members, alphabet),
                truncated: fair_trunc,
            },
        );
        let guards = guard_sets(t, ctx)?;
        let (guard_members, guard_trunc) = dump_sets(ctx, &guards, DEBUG_MEMBER_CAP)?;
        families.insert(
            "guard".to_string(),
            FamilyDump {
                sets: guard_members
                    .iter()
                    .map(|&s| set_names(s, alphabet))
                    .collect(),
                pairs: Vec::new(),
                truncated: guard_trunc,
            },
        );
        for x in scope.iter().filter(|x| t.has_free_var(x)) {
            let n = nonexpansive_sets(t, x, ctx)?;
            let (nm, nt) = dump_pairs(ctx, &n, DEBUG_MEMBER_CAP)?;
            families.insert(
                format!("nonexpansive[{x}]"),
                FamilyDump {
                    sets: Vec::new(),
                    pairs: pair_names(&nm, alphabet),
                    truncated: nt,
                },
            );
            let c = contractive_sets(t, x, ctx)?;
            let (cm, ct) = dump_pairs(ctx, &c, DEBUG_MEMBER_CAP)?;
            families.insert(
                format!("contractive[{x}]"),
                FamilyDump {
                    sets: Vec::new(),
                    pairs: pair_names(&cm, alphabet),
                    truncated: ct,
                },
            );
        }
        debug.push(DebugNode {
            path,
            term: display_term(t, alphabet).to_string(),
            delta: None,
            families,
        });
    }
    Ok(())
}

fn run_oracle(t: &Term, alphabet: &Alphabet, max_states: usize) -> OracleReport {
    let lts = build_lts(
        t,
        &LtsOptions {
            fuse_hides: true,
            max_states,
        },
    );
    let states = lts.state_count();
    let verdict = match check_divergence(&lts) {
        OracleVerdict::LivelockFree => Verdict {
            kind: VerdictKind::LivelockFree,
            framework: FrameworkTag::Oracle,
            reason: None,
            certificate: Some(Certificate {
                framework: FrameworkTag::Oracle,
                note: Some(format!(
                    "complete exploration: {states} states, no cycle of internal moves"
                )),
                fair_witness: None,
                nodes: Vec::new(),
            }),
        },
        OracleVerdict::Divergent(w) => Verdict {
            kind: VerdictKind::Divergent,
            framework: FrameworkTag::Oracle,
            reason: Some(w.display(alphabet)),
            certificate: None,
        },
        OracleVerdict::Unknown => Verdict {
            kind: VerdictKind::Inconclusive,
            framework: FrameworkTag::Oracle,
            reason: Some(format!("exploration truncated at {states} states")),
            certificate: None,
        },
    };
    OracleReport {
        verdict,
        states,
        complete: lts.complete,
    }
}

/// Render a verdict's certificate as a self-contained text document.
pub fn emit_certificate(report: &Report) -> Result<String, AnalyzeError> {
    let cert = report
        .verdict
        .certificate
        .as_ref()
        .ok_or(AnalyzeError::NoCertificate)?;
    let mut doc = String::new();
    let mut line = |s: String| {
        doc.push_str(&s);
        doc.push('\n');
    };
    line("livelock-freedom certificate".to_string());
    line("============================".to_string());
    line(format!("process:   {}", report.root));
    line(format!("alphabet:  {{{}}}", report.alphabet.join(", ")));
    line(format!("class:     {}", report.classification));
    line(format!(
        "framework: {}",
        match cert.framework {
            FrameworkTag::Sfs => "structurally finite-state rules",
            FrameworkTag::General => "general fair-set rules",
            FrameworkTag::Oracle => "exhaustive state exploration",
        }
    ));
    if let Some(note) = &cert.note {
        line(format!("basis:     {note}"));
    }
    if let Some(w) = &cert.fair_witness {
        line(format!(
            "witness:   given {{{}}} from the environment, performs {{{}}} forever",
            w.assumes.join(", "),
            w.performs.join(", ")
        ));
    }
    if !cert.nodes.is_empty() {
        line(String::new());
        line("per-node families (post-order):".to_string());
        for node in &cert.nodes {
            line(String::new());
            line(format!("  [{}] {}", node.path, node.term));
            if let Some(d) = node.delta {
                line(format!("    delta: {d}"));
            }
            for (a, b) in &node.members {
                line(format!("    ({{{}}} ; {{{}}})", a.join(", "), b.join(", ")));
            }
            if node.truncated {
                line("    … (family truncated)".to_string());
            }
            if let Some(note) = &node.note {
                line(format!("    {note}"));
            }
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    const PROTOCOL: &str = "alphabet {error, in, out};\n\
        Send = in -> Medium;\n\
        Medium = (out -> Send) [] (error -> Medium);\n\
        Fair = (out -> Fair) [] (error -> out -> Fair);\n\
        Network = Send [| {error, out} |] Fair;\n\
        System = Network \\ {error};\n\
        root System;";

    fn analyze(src: &str, config: &AnalyzeConfig) -> Report {
        analyze_spec(&parse(src).unwrap(), config).unwrap()
    }

    #[test]
    fn protocol_report_via_auto() {
        let report = analyze(PROTOCOL, &AnalyzeConfig::default());
        assert_eq!(report.verdict.kind, VerdictKind::LivelockFree);
        assert_eq!(report.verdict.framework, FrameworkTag::Sfs);
        assert_eq!(report.classification, "sfs");
        assert_eq!(report.backend, "explicit");
        let cert = report.verdict.certificate.as_ref().unwrap();
        assert_eq!(cert.nodes.len(), 4);
        assert!(cert.nodes.iter().all(|n| n.delta == Some(false)));
        let doc = emit_certificate(&report).unwrap();
        assert!(doc.contains("per-node families"));
        assert!(doc.contains("[root]"));
    }

    #[test]
    fn protocol_under_general_rules() {
        let config = AnalyzeConfig {
            mode: Mode::General,
            ..Default::default()
        };
        let report = analyze(PROTOCOL, &config);
        assert_eq!(report.verdict.kind, VerdictKind::LivelockFree);
        assert_eq!(report.verdict.framework, FrameworkTag::General);
        let w = report
            .verdict
            .certificate
            .as_ref()
            .unwrap()
            .fair_witness
            .as_ref()
            .unwrap();
        assert_eq!(w.assumes, Vec::<String>::new());
        assert_eq!(w.performs, vec!["out".to_string()]);
    }

    #[test]
    fn unguarded_recursion_is_inconclusive_with_divergent_oracle() {
        let config = AnalyzeConfig {
            oracle: true,
            ..Default::default()
        };
        let report = analyze("alphabet {a};\nP = mu X . X;\nroot P;", &config);
        assert_eq!(report.verdict.kind, VerdictKind::Inconclusive);
        assert_eq!(
            report.verdict.reason.as_deref(),
            Some("delta true at root")
        );
        let oracle = report.oracle.as_ref().unwrap();
        assert_eq!(oracle.verdict.kind, VerdictKind::Divergent);
        assert!(matches!(
            emit_certificate(&report),
            Err(AnalyzeError::NoCertificate)
        ));
    }

    #[test]
    fn forcing_finite_state_rules_on_general_terms_is_an_error() {
        let spec = parse("alphabet {a};\nP = mu X . a -> (X \\ {a});\nroot P;").unwrap();
        let config = AnalyzeConfig {
            mode: Mode::Sfs,
            ..Default::default()
        };
        assert!(matches!(
            analyze_spec(&spec, &config),
            Err(AnalyzeError::ModeMismatch { .. })
        ));
    }

    #[test]
    fn div_is_inconclusive_in_both_modes() {
        for mode in [Mode::Sfs, Mode::General, Mode::Auto] {
            let config = AnalyzeConfig {
                mode,
                ..Default::default()
            };
            let report = analyze("alphabet {a};\nP = a -> DIV;\nroot P;", &config);
            assert_eq!(report.verdict.kind, VerdictKind::Inconclusive);
            assert_eq!(report.verdict.reason.as_deref(), Some("contains DIV"));
        }
    }

    #[test]
    fn race_mode_reports_both_backends() {
        let config = AnalyzeConfig {
            verify_race: true,
            ..Default::default()
        };
        let report = analyze(PROTOCOL, &config);
        let race = report.race.as_ref().unwrap();
        assert!(race.agreed);
        assert_eq!(race.verdicts.len(), 2);
        assert_eq!(report.backend, "race");
        assert!(report.timing.first_verdict_from.is_some());
        assert_eq!(report.verdict.kind, VerdictKind::LivelockFree);
    }

    #[test]
    fn reports_are_deterministic_outside_timing() {
        let strip = |report: &Report| {
            let mut v = serde_json::to_value(report).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            serde_json::to_string(&v).unwrap()
        };
        let config = AnalyzeConfig {
            oracle: true,
            debug_families: true,
            ..Default::default()
        };
        let a = strip(&analyze(PROTOCOL, &config));
        let b = strip(&analyze(PROTOCOL, &config));
        assert_eq!(a, b);
    }

    #[test]
    fn symbolic_backend_is_chosen_for_wide_alphabets() {
        let spec = crate::benchgen::generate(crate::benchgen::Family::Milner, 5).unwrap();
        let report = analyze_spec(&spec, &AnalyzeConfig::default()).unwrap();
        assert_eq!(report.backend, "symbolic");
        assert_eq!(report.verdict.kind, VerdictKind::LivelockFree);
    }

    #[test]
    fn debug_dump_lists_all_four_families() {
        let config = AnalyzeConfig {
            mode: Mode::General,
            debug_families: true,
            ..Default::default()
        };
        let report = analyze("alphabet {a, b};\nP = mu X . a -> X;\nroot P;", &config);
        let debug = report.debug.as_ref().unwrap();
        let body = debug
            .iter()
            .find(|n| n.families.contains_key("nonexpansive[X]"))
            .expect("some node under the binder");
        assert!(body.families.contains_key("contractive[X]"));
        assert!(body.families.contains_key("fair"));
        assert!(body.families.contains_key("guard"));
    }
}
