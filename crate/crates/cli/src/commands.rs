use std::fs;
use std::io::Write;
use std::path::Path;

use matchlab_core::axioms::{sweep, Axiom};
use matchlab_core::classic::top_trading_cycles;
use matchlab_core::enumerate::all_profiles;
use matchlab_core::experiment::{run_experiment, to_csv};
use matchlab_core::io::{
    compact_profile, format_corpus, format_matching, format_matrix, format_order, parse_corpus,
    parse_order, parse_profile, LabeledProfile, Labels,
};
use matchlab_core::lottery::{equivalent_on, OrderSet, Verdict};
use matchlab_core::trace::{format_outcome, format_trace};
use matchlab_core::{
    exact_lottery, run_engine, run_gale_shapley, sampled_lottery, AgentOrder, Base, Error,
    ExperimentConfig, Mechanism, Profile, ProfileSampler, SampleConfig,
};

use crate::{Command, Out};

/// Largest n for which every profile is enumerated.
const EXHAUSTIVE_LIMIT: usize = 4;
/// Largest n for which `compare --samples` still runs every order.
const COMPARE_ALL_ORDERS: usize = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn refuse(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

/// Errors from reading and processing inputs. Enumeration limits get their
/// own exit code and a pointer to sampling.
fn input(e: Error) -> Failure {
    match e {
        Error::LimitExceeded { .. } => refuse(format!("{e}; use --samples instead")),
        e => Failure {
            code: 2,
            message: e.to_string(),
        },
    }
}

type Outcome = Result<(), Failure>;

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Run {
            profile,
            mechanism,
            order,
            trace,
            out,
        } => run(&profile, &mechanism, order.as_deref(), trace, &out),
        Command::Lottery {
            profile,
            mechanism,
            exact: _,
            samples,
            seed,
            out,
        } => lottery(&profile, &mechanism, samples, seed, &out),
        Command::Axioms {
            mechanisms,
            n,
            axioms,
            exhaustive: _,
            samples,
            seed,
            out,
        } => axioms_cmd(&mechanisms, n, &axioms, samples, seed, &out),
        Command::Experiment { config, out } => experiment(&config, &out),
        Command::Generate {
            n,
            count,
            seed,
            exhaustive,
            out,
        } => generate(n, count, seed, exhaustive, &out),
        Command::Compare {
            left,
            right,
            n,
            profiles,
            exhaustive: _,
            samples,
            seed,
            out,
        } => compare(&left, &right, n, profiles.as_deref(), samples, seed, &out),
    }
}

fn emit(out: &Out, text: &str) -> Outcome {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not worth reporting.
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_profile(path: &Path) -> Result<LabeledProfile, Failure> {
    parse_profile(&read(path)?).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn mechanism(code: &str) -> Result<Mechanism, Failure> {
    Mechanism::parse(code).map_err(|e| usage(e.to_string()))
}

fn run(path: &Path, code: &str, order: Option<&str>, trace: bool, out: &Out) -> Outcome {
    let lp = load_profile(path)?;
    let (p, labels) = (&lp.profile, &lp.labels);
    let mech = mechanism(code)?;
    if mech.randomized {
        return Err(usage(format!(
            "`{code}` is randomized; use `matchlab lottery`"
        )));
    }
    if !mech.is_discrete() {
        return Err(usage("PS has a fractional outcome; use `matchlab lottery`"));
    }
    mech.check_profile(p).map_err(input)?;
    let order = match order {
        Some(text) => parse_order(text, labels).map_err(|e| usage(e.to_string()))?,
        None => AgentOrder::identity(p.n()),
    };
    let mut text = String::new();
    let summary = match mech.base {
        Base::Engine(config) => {
            let r = run_engine(p, &order, config);
            if trace {
                text.push_str("# k | proposal | outcome | pending | matching | memories\n");
                text.push_str(&format_trace(&r.trace, &order, config, labels).map_err(input)?);
            }
            let m = if mech.ttc {
                top_trading_cycles(p, &r.matching)
            } else {
                r.matching
            };
            format!(
                "{}; proposals={}",
                format_matching(&m, labels),
                r.proposal_count
            )
        }
        Base::GaleShapley => {
            let r = run_gale_shapley(p, &order).map_err(input)?;
            if trace {
                text.push_str("# k | proposal | outcome\n");
                for (k, ev) in r.trace.iter().enumerate() {
                    text.push_str(&format!(
                        "{} | {} -> {} | {}\n",
                        k + 1,
                        labels.agent(ev.proposer),
                        labels.item(ev.item),
                        format_outcome(ev, labels)
                    ));
                }
            }
            let m = if mech.ttc {
                top_trading_cycles(p, &r.matching)
            } else {
                r.matching
            };
            format!(
                "{}; proposals={}",
                format_matching(&m, labels),
                r.proposal_count
            )
        }
        _ => {
            if trace {
                return Err(usage(format!(
                    "--trace is available for engine codes and GS, not {}",
                    mech.base.code()
                )));
            }
            format_matching(&mech.run_matching(p, &order).map_err(input)?, labels)
        }
    };
    text.push_str(&summary);
    text.push('\n');
    emit(out, &text)
}

fn lottery(path: &Path, code: &str, samples: Option<usize>, seed: u64, out: &Out) -> Outcome {
    let lp = load_profile(path)?;
    let mech = mechanism(code)?.randomize();
    let result = match samples {
        Some(k) => {
            let cfg = SampleConfig::new(k, seed).map_err(|e| usage(e.to_string()))?;
            sampled_lottery(mech, &lp.profile, cfg)
        }
        None => exact_lottery(mech, &lp.profile),
    }
    .map_err(input)?;
    emit(out, &format_matrix(&result.assignment, Some(&lp.labels)))
}

fn check_exhaustive(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(usage("n must be at least 1"));
    }
    if n > EXHAUSTIVE_LIMIT {
        return Err(refuse(format!(
            "exhaustive mode covers n <= {EXHAUSTIVE_LIMIT} (n!^n profiles); use --samples instead"
        )));
    }
    Ok(())
}

fn exhaustive_profiles(n: usize) -> Result<Box<dyn Iterator<Item = Profile>>, Failure> {
    check_exhaustive(n)?;
    Ok(Box::new(all_profiles(n)))
}

fn sampled_profiles(n: usize, count: u64, seed: u64) -> Result<Vec<Profile>, Failure> {
    Ok(ProfileSampler::new(n, seed)
        .map_err(|e| usage(e.to_string()))?
        .profiles(count))
}

fn axioms_cmd(
    codes: &[String],
    n: usize,
    names: &[String],
    samples: Option<u64>,
    seed: u64,
    out: &Out,
) -> Outcome {
    let mechs = codes
        .iter()
        .map(|c| mechanism(c))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(m) = mechs.iter().find(|m| m.base.needs_item_prefs()) {
        return Err(usage(format!(
            "{m} needs item preferences; axiom sweeps use one-sided profiles"
        )));
    }
    let axioms = names
        .iter()
        .map(|a| Axiom::parse(a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let sampled = match samples {
        Some(k) => Some(sampled_profiles(n, k, seed)?),
        None => {
            check_exhaustive(n)?;
            None
        }
    };
    let mut text = String::from("# axiom, mechanism, n, verdict, profile, order, misreport\n");
    for &mech in &mechs {
        for &axiom in &axioms {
            if axiom == Axiom::ExPost && !mech.is_discrete() {
                text.push_str(&format!("{}, {mech}, {n}, N/A, -, -, -\n", axiom.name()));
                continue;
            }
            let line = match &sampled {
                Some(ps) => sweep(mech, axiom, n, ps.iter().cloned()),
                None => sweep(
                    mech,
                    axiom,
                    n,
                    with_progress(exhaustive_profiles(n)?, mech, axiom),
                ),
            }
            .map_err(input)?;
            text.push_str(&line.to_string());
            text.push('\n');
        }
    }
    emit(out, &text)
}

/// Reports progress on stderr for large sweeps.
fn with_progress(
    profiles: Box<dyn Iterator<Item = Profile>>,
    mech: Mechanism,
    axiom: Axiom,
) -> impl Iterator<Item = Profile> {
    profiles.enumerate().map(move |(k, p)| {
        if k > 0 && k % 50_000 == 0 {
            eprintln!("{} {mech}: {k} profiles checked", axiom.name());
        }
        p
    })
}

fn experiment(path: &Path, out: &Out) -> Outcome {
    let cfg = ExperimentConfig::parse(&read(path)?).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    let rows = run_experiment(&cfg).map_err(input)?;
    emit(out, &to_csv(&rows).map_err(input)?)
}

fn generate(n: usize, count: u64, seed: u64, exhaustive: bool, out: &Out) -> Outcome {
    let profiles: Vec<Profile> = if exhaustive {
        exhaustive_profiles(n)?.collect()
    } else {
        sampled_profiles(n, count, seed)?
    };
    emit(out, &format_corpus(&profiles))
}

fn compare(
    left: &str,
    right: &str,
    n: Option<usize>,
    corpus: Option<&Path>,
    samples: Option<u64>,
    seed: u64,
    out: &Out,
) -> Outcome {
    let (a, b) = (mechanism(left)?, mechanism(right)?);
    let (profiles, orders) = match (corpus, n, samples) {
        (Some(path), _, _) => {
            let list = parse_corpus(&read(path)?).map_err(|e| Failure {
                code: 2,
                message: format!("{}: {e}", path.display()),
            })?;
            (
                list.into_iter().map(|lp| lp.profile).collect::<Vec<_>>(),
                OrderSet::All,
            )
        }
        (None, Some(n), Some(k)) => {
            let orders = if n <= COMPARE_ALL_ORDERS {
                OrderSet::All
            } else {
                OrderSet::Sampled(SampleConfig::new(64, seed).map_err(|e| usage(e.to_string()))?)
            };
            (sampled_profiles(n, k, seed)?, orders)
        }
        (None, Some(n), None) => (exhaustive_profiles(n)?.collect(), OrderSet::All),
        (None, None, _) => return Err(usage("give --n or --profiles")),
    };
    for m in [a, b] {
        if let Some(p) = profiles.first() {
            m.check_profile(p).map_err(input)?;
        }
    }
    let text = match equivalent_on(a, b, &profiles, orders).map_err(input)? {
        Verdict::Equal { cases } => format!(
            "{a} and {b} agree on {} profiles ({cases} cases)\n",
            profiles.len()
        ),
        Verdict::Differ(c) => {
            let p = &profiles[c.profile_index];
            let labels = Labels::default_for(p.n());
            let order = c
                .order
                .as_ref()
                .map_or("-".to_string(), |o| format_order(o, &labels));
            format!(
                "{a} and {b} differ on profile {} ({}), order {order}\n# {a}\n{}# {b}\n{}",
                c.profile_index + 1,
                compact_profile(p, &labels),
                format_matrix(&c.left, None),
                format_matrix(&c.right, None),
            )
        }
    };
    emit(out, &text)
}
