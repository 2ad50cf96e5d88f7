use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use caqc_core::compiler::{compile_block, compile_extended_block, theorem2_program};
use caqc_core::mbqc::{commute_byproducts, flatten_angles, random_angles, run_algorithm1, run_extended};
use caqc_core::pqc::{self, DataSource};
use caqc_core::resource::{self, LatticeCode};
use caqc_core::*;
use serde_json::json;

use crate::output::{pretty, Output};
use crate::*;

pub enum Failure {
    /// Invalid input for the model or a violated hypothesis.
    Domain(String),
    /// Malformed command line.
    Usage(String),
}

impl From<CaqcError> for Failure {
    fn from(e: CaqcError) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

/// A built-in name, or a JSON rule file.
fn load_rule(arg: &RuleArg) -> Res<Cqca> {
    if let Some(t) = Cqca::builtin(&arg.rule) {
        return Ok(t);
    }
    let path = Path::new(&arg.rule);
    if !path.exists() {
        return Err(Failure::Usage(format!(
            "unknown rule {:?}: expected one of {} or a rule JSON file",
            arg.rule,
            cqca::BUILTIN_RULES.join(", ")
        )));
    }
    Ok(Cqca::from_json_str(&read(path)?)?)
}

pub fn run(cli: &Cli) -> Res<Output> {
    match &cli.command {
        Command::Cqca(c) => cqca_cmd(c),
        Command::Compile(a) => compile(a),
        Command::Mbqc(MbqcCmd::Run(a)) => mbqc_run(a, cli.seed),
        Command::Resource(ResourceCmd::Build(a)) => resource_build(a),
        Command::Pqc(c) => pqc_cmd(c, cli),
    }
}

fn cqca_cmd(c: &CqcaCmd) -> Res<Output> {
    match c {
        CqcaCmd::Classify { rule, n, search_radius, period_cap } => {
            let t = load_rule(rule)?;
            if let Some(n) = n {
                t.validate(*n)?;
            }
            let c = t.classify(search_radius.unwrap_or(2 * t.radius() + 2), *period_cap)?;
            let mut j = c.to_json();
            j["rule"] = json!(t.name());
            let text = format!(
                "{}: {}, {}, {}\n",
                t.name(),
                if c.is_simple { "simple" } else { "not simple" },
                if c.is_entangling { "entangling" } else { "not entangling" },
                c.kind.label()
            );
            Ok(Output::new("classify", j, text))
        }
        CqcaCmd::Period { rule, n, cap } => {
            let t = load_rule(rule)?;
            let l = t.period_with_cap(*n, cap.unwrap_or(cqca::DEFAULT_PERIOD_FACTOR * n))?;
            let text = format!("{} on {n} qubits: period {l}\n", t.name());
            Ok(Output::new("period", json!({"rule": t.name(), "n": n, "period": l}), text))
        }
        CqcaCmd::Lemma2 { rule, n } => {
            let t = load_rule(rule)?;
            let n = n.unwrap_or(4 * t.radius() + 1);
            let c = t.lemma2_solve(n)?;
            let rhs = c.reconstruct(&t, n, 0)?;
            let mut j = serde_json::to_value(&c).expect("coefficients serialize");
            j["rule"] = json!(t.name());
            j["n"] = json!(n);
            j["t2_z0"] = json!(rhs.to_string());
            let text = format!("{} (n = {n}): m = {}, alpha = {:?}, beta = {}; T^2(Z_0) = {rhs}\n", t.name(), c.m, c.alpha, c.beta);
            Ok(Output::new("lemma2", j, text))
        }
    }
}

fn compile(a: &CompileArgs) -> Res<Output> {
    let t = load_rule(&a.rule)?;
    if a.blocks == 0 {
        return Err(Failure::Usage("--blocks must be at least 1".into()));
    }
    let prog = if a.extended { compile_extended_block(&t, a.n, a.blocks)? } else { compile_block(&t, a.n, a.blocks)? };
    let mut text = format!("{} n={} period={} params={}\n", prog.meta.rule, prog.n_qubits, prog.meta.period, prog.n_params);
    let mut csv = String::from("param_index,generator,sign,depth,kind\n");
    for r in &prog.rotations {
        let sign = if r.sign < 0.0 { "-" } else { "+" };
        let kind = match r.kind {
            RotationKind::Theta => "theta",
            RotationKind::Gamma => "gamma",
        };
        let _ = writeln!(text, "j={:<3} {kind:<5} p{:<4} exp(i {sign}p {})", r.depth, r.param, r.generator);
        let _ = writeln!(csv, "{},{},{},{},{kind}", r.param, r.generator, r.sign as i32, r.depth);
    }
    Ok(Output::new("program", prog.to_json(), text).with_csv(csv))
}

/// Angle grid from `random`, `random:<seed>`, a CSV file or inline `a,b;c,d` rows.
fn parse_angles(spec: &str, rows: usize, n: usize, seed: u64) -> Res<Vec<Vec<f64>>> {
    let random = |s: u64| random_angles(rows, n, &mut rng::stream(s, "angles"));
    if spec == "random" {
        return Ok(random(seed));
    }
    if let Some(s) = spec.strip_prefix("random:") {
        return s.parse().map(random).map_err(|_| Failure::Usage(format!("bad angle seed {s:?}")));
    }
    let body = if Path::new(spec).is_file() { read(Path::new(spec))? } else { spec.replace(';', "\n") };
    let grid = body
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("bad angles: {e}")))?;
    if grid.len() != rows || grid.iter().any(|r| r.len() != n) {
        return Err(Failure::Usage(format!("angles must be {rows} rows of {n} values")));
    }
    Ok(grid)
}

fn bits(rows: &[Vec<bool>]) -> Vec<Vec<u8>> {
    rows.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect()
}

fn mbqc_run(a: &MbqcRunArgs, seed: u64) -> Res<Output> {
    let t = load_rule(&a.rule)?;
    let rows = if a.extended { 2 * a.depth } else { a.depth };
    let angles = parse_angles(&a.angles, rows, a.n, seed)?;
    let cfg = MbqcConfig { corrected: !a.uncorrected, folded: a.folded, forced_outcomes: None, seed };
    let run = if a.extended {
        let theta: Vec<_> = angles.iter().step_by(2).cloned().collect();
        let gamma: Vec<_> = angles.iter().skip(1).step_by(2).cloned().collect();
        run_extended(&t, a.n, a.depth, &theta, &gamma, &cfg)?
    } else {
        run_algorithm1(&t, a.n, a.depth, &angles, &cfg)?
    };
    // The byproduct tail needs no program; the comparison does (D a multiple of L).
    let mut entries: Vec<_> = run.ledger.entries.iter().collect();
    entries.sort_by_key(|b| b.step);
    let tail = entries.iter().fold(PauliProduct::identity(a.n), |acc, b| b.operator.mul_unchecked(&acc));
    let fidelity = match theorem2_program(&t, a.n, a.depth, a.extended) {
        Ok(prog) => {
            let (tail, prog) = if run.corrected { (PauliProduct::identity(a.n), prog) } else { commute_byproducts(&run.ledger, &prog)? };
            let mut want = DenseState::plus(a.n)?;
            prog.evaluate(&flatten_angles(&angles), &mut want)?;
            want.apply_pauli(&tail)?;
            Some(run.final_state.fidelity(&want)?)
        }
        Err(_) => None,
    };
    let mut out = Output::new(
        "mbqc",
        json!({
            "rule": t.name(),
            "n": a.n,
            "depth": a.depth,
            "extended": a.extended,
            "corrected": run.corrected,
            "seed": seed,
            "angles": angles,
            "outcomes": bits(&run.outcomes),
            "fidelity_vs_program": fidelity,
            "byproduct_tail": tail.to_string(),
        }),
        String::new(),
    );
    let mut text = format!("{} n={} D={} {}\n", t.name(), a.n, a.depth, if run.corrected { "corrected" } else { "uncorrected" });
    for (k, m) in run.outcomes.iter().enumerate() {
        let _ = writeln!(text, "iteration {:>3}: {}", k + 1, m.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>());
    }
    let _ = writeln!(text, "byproduct tail: {tail}");
    match fidelity {
        Some(f) => {
            let _ = writeln!(text, "fidelity vs rotation program: {f:.12}");
        }
        None => text.push_str("fidelity vs rotation program: n/a (depth is not a multiple of the period)\n"),
    }
    out.text = text;
    let mut csv = String::from("iteration,site,outcome\n");
    for (k, m) in run.outcomes.iter().enumerate() {
        for (i, &b) in m.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", k + 1, i, b as u8);
        }
    }
    out.csv = Some(csv);
    if let Some(path) = &a.dump {
        let f = std::fs::File::create(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
        run.final_state.write_dump(std::io::BufWriter::new(f))?;
    }
    Ok(out)
}

fn resource_build(a: &ResourceArgs) -> Res<Output> {
    let t = load_rule(&a.rule)?;
    let fixes_z = *t.z_image() == LocalPauliPattern::single(Letter::Z);
    let lattice: LatticeCode = if a.extended {
        resource::build_prop2(&t, a.n, a.depth)?
    } else if fixes_z && a.ghz {
        resource::build_ghz_case(&t, a.n, a.depth)?
    } else if fixes_z {
        return Err(Failure::Domain(format!(
            "{} maps Z to Z, so the lattice is {} row GHZ states, which is not a universal resource; \
             pass --ghz to build it anyway or --extended for the decorated lattice",
            t.name(),
            a.n
        )));
    } else {
        resource::build_theorem3(&t, a.n, a.depth)?
    };
    let edges = resource::recognize_graph_state(&lattice.code);
    let dot = edges.as_ref().map(|e| resource::graph_to_dot(lattice.rows, lattice.cols, e));
    let mut j = lattice.to_json();
    j["graph_edges"] = json!(edges);
    j["max_column_span"] = json!(lattice.max_column_span());

    let mut text = format!("{} lattice: {} rows x {} columns\n", lattice.rule, lattice.rows, lattice.cols);
    for g in lattice.code.stabilizers() {
        let _ = writeln!(text, "{g}");
    }
    text.push('\n');
    text.push_str(&lattice.render_all());
    match &dot {
        Some(d) => {
            text.push_str("\ngraph state:\n");
            text.push_str(d);
        }
        None => text.push_str("\nnot a graph state with these generators\n"),
    }
    let mut csv = String::from("column,row,family,pauli\n");
    for (r, g) in lattice.roles.iter().zip(lattice.code.stabilizers()) {
        let _ = writeln!(csv, "{},{},{:?},{g}", r.column, r.row, r.family);
    }
    let mut out = Output::new("resource", j, text).with_csv(csv);
    if let Some(d) = dot {
        out.files.push(("resource.dot".into(), d.into_bytes()));
    }
    Ok(out)
}

fn build_model(m: &ModelArgs, n: usize) -> Res<PqcModel> {
    let t = load_rule(&m.rule)?;
    Ok(PqcModel::new(&t, n, m.depth, m.extended, m.encoder_reps)?)
}

fn pqc_cmd(c: &PqcCmd, cli: &Cli) -> Res<Output> {
    let seed = cli.seed;
    match c {
        PqcCmd::Label { model, n, samples, images, labels, classes } => {
            let labeler = build_model(model, *n)?;
            let (inputs, source) = match (images, labels) {
                (Some(img), Some(lab)) => {
                    let x = pqc::load_mnist_pca(img, lab, *n, classes.as_deref(), Some(*samples))?;
                    let src = DataSource::MnistPca { images: img.display().to_string(), labels: lab.display().to_string(), seed };
                    (x, src)
                }
                _ => (pqc::synthetic_inputs(*n, *samples, seed), DataSource::Synthetic { seed }),
            };
            let (data, _) = pqc::make_stilted_dataset(&labeler, inputs, source, seed)?;
            let j = serde_json::to_value(&data).expect("datasets serialize");
            let text = format!(
                "{} samples labelled by {} (seed {seed}), label_norm {:.6}\n",
                data.labels.len(),
                data.provenance.labeler,
                data.label_norm
            );
            let mut csv = (0..*n).map(|i| format!("x{i},")).collect::<String>() + "label\n";
            for (x, y) in data.inputs.iter().zip(&data.labels) {
                let _ = writeln!(csv, "{}{y:e}", x.iter().map(|v| format!("{v:e},")).collect::<String>());
            }
            Ok(Output::new("dataset", j, text).with_csv(csv))
        }
        PqcCmd::Train { model, dataset, preset, epochs, lr, batch, grad } => {
            let data: Dataset = serde_json::from_str(&read(dataset)?)
                .map_err(|e| Failure::Domain(format!("{}: {e}", dataset.display())))?;
            let n = data.inputs.first().map(Vec::len).ok_or_else(|| Failure::Domain("empty dataset".into()))?;
            let mut m = build_model(model, n)?;
            m.randomize(&mut rng::stream(seed, "params"));
            let mut cfg = match preset {
                Preset::Default => TrainConfig::default(),
                Preset::Experiment => TrainConfig::experiment(),
            };
            cfg.epochs = epochs.unwrap_or(cfg.epochs);
            cfg.lr = lr.unwrap_or(cfg.lr);
            cfg.batch = batch.unwrap_or(cfg.batch);
            if let Some(g) = grad {
                cfg.grad = match g {
                    GradArg::ParameterShift => GradMethod::ParameterShift,
                    GradArg::FiniteDiff => GradMethod::FiniteDiff,
                    GradArg::Adjoint => GradMethod::Adjoint,
                };
            }
            let log = pqc::train(&mut m, &data, &cfg, seed)?;
            let j = json!({
                "learner": m.rule,
                "depth": m.depth,
                "dataset": dataset.display().to_string(),
                "provenance": data.provenance,
                "config": cfg,
                "seed": seed,
                "losses": log.losses,
                "final_loss": log.final_loss,
                "restarts": log.restarts,
                "params": m.params,
            });
            let text = format!("{} on {}: final loss {:.6e} after {} epochs, {} restarts\n", m.rule, data.provenance.labeler, log.final_loss, log.losses.len(), log.restarts);
            let mut csv = String::from("epoch,loss\n");
            for (k, l) in log.losses.iter().chain(std::iter::once(&log.final_loss)).enumerate() {
                let _ = writeln!(csv, "{k},{l:e}");
            }
            Ok(Output::new("training", j, text).with_csv(csv))
        }
        PqcCmd::Experiment { config } => {
            let cfg: ExperimentConfig = match config {
                Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::Domain(format!("{}: {e}", p.display())))?,
                None => ExperimentConfig::default(),
            };
            let res = pqc::run_experiment(&cfg)?;
            let summary = res.summary_json();
            let mut text = format!("{:<28}", "labeler \\ learner");
            for l in &res.labels {
                let _ = write!(text, "{l:>28}");
            }
            text.push('\n');
            for (a, row) in res.grid.iter().enumerate() {
                let _ = write!(text, "{:<28}", res.labels[a]);
                for v in row {
                    let _ = write!(text, "{v:>28.3e}");
                }
                text.push('\n');
            }
            let csv = res.to_csv();
            let mut out = Output::new("experiment", summary.clone(), text).with_csv(csv.clone());
            out.files.push(("results.csv".into(), csv.into_bytes()));
            out.files.push(("summary.json".into(), pretty(&summary).into_bytes()));
            out.default_dir = Some(PathBuf::from("."));
            Ok(out)
        }
    }
}
