//! Simulated-teacher Test-then-Train protocol and evaluation metrics.
//!
//! The teacher introduces one category at a time. After each introduction it
//! keeps showing unseen instances of the known categories; a wrong answer is
//! corrected, which stores the instance. Once the running accuracy over the
//! last `max(3k, 10)` questions of the phase exceeds τ, the next category is
//! introduced. The run ends with `lack_of_data` when categories or instances
//! run out, or `breakpoint_reached` after `breakpoint` questions without a
//! new category.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::ObjectDescriptor;
use crate::error::{Error, Result};
use crate::learner::{CategoryStore, Distance};

/// Label → ordered items, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    categories: Vec<(String, Vec<T>)>,
}

impl<T> LabeledDataset<T> {
    /// Rejects empty categories and duplicate labels.
    pub fn new(categories: Vec<(String, Vec<T>)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (label, items) in &categories {
            if !seen.insert(label.as_str()) {
                return Err(Error::Dataset(format!("duplicate label `{label}`")));
            }
            if items.is_empty() {
                return Err(Error::Dataset(format!("category `{label}` is empty")));
            }
        }
        Ok(Self { categories })
    }

    pub fn categories(&self) -> &[(String, Vec<T>)] {
        &self.categories
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|(l, _)| l.as_str())
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn num_items(&self) -> usize {
        self.categories.iter().map(|(_, v)| v.len()).sum()
    }

    /// `(label, item)` pairs in dataset order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.categories
            .iter()
            .flat_map(|(l, v)| v.iter().map(move |x| (l.as_str(), x)))
    }

    pub fn try_map<U>(&self, f: impl Fn(&str, &T) -> Result<U>) -> Result<LabeledDataset<U>> {
        let categories = self
            .categories
            .iter()
            .map(|(l, v)| Ok((l.clone(), v.iter().map(|x| f(l, x)).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset { categories })
    }
}

/// An object as the learner sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub descriptor: ObjectDescriptor,
}

/// The learning agent driven by the protocol.
pub trait Agent {
    /// Predicted label, `None` for unknown.
    fn predict(&self, sample: &Sample) -> Result<Option<String>>;
    /// Stores `sample` under `label` (teach or correct).
    fn learn(&mut self, label: &str, sample: &Sample) -> Result<()>;
    fn stored_instances(&self) -> usize;
}

impl Agent for CategoryStore {
    fn predict(&self, sample: &Sample) -> Result<Option<String>> {
        Ok(self.classify(&sample.descriptor)?.predicted)
    }

    fn learn(&mut self, label: &str, sample: &Sample) -> Result<()> {
        self.teach(label, &sample.descriptor)
    }

    fn stored_instances(&self) -> usize {
        self.num_instances()
    }
}

/// Answers with the true label of every taught category; used to check the
/// protocol itself.
#[derive(Debug, Clone, Default)]
pub struct OracleAgent {
    truth: HashMap<String, String>,
    known: std::collections::HashSet<String>,
    stored: usize,
}

impl OracleAgent {
    pub fn new(data: &LabeledDataset<Sample>) -> Self {
        let truth = data
            .iter()
            .map(|(l, s)| (s.id.clone(), l.to_string()))
            .collect();
        Self {
            truth,
            ..Self::default()
        }
    }
}

impl Agent for OracleAgent {
    fn predict(&self, sample: &Sample) -> Result<Option<String>> {
        Ok(self
            .truth
            .get(&sample.id)
            .filter(|l| self.known.contains(*l))
            .cloned())
    }

    fn learn(&mut self, label: &str, _sample: &Sample) -> Result<()> {
        self.known.insert(label.to_string());
        self.stored += 1;
        Ok(())
    }

    fn stored_instances(&self) -> usize {
        self.stored
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Teach,
    Ask,
    Correct,
}

impl Action {
    fn as_str(self) -> &'static str {
        match self {
            Action::Teach => "teach",
            Action::Ask => "ask",
            Action::Correct => "correct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCondition {
    LackOfData,
    BreakpointReached,
}

impl fmt::Display for StopCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopCondition::LackOfData => "lack_of_data",
            StopCondition::BreakpointReached => "breakpoint_reached",
        })
    }
}

/// One protocol step.
#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub index: usize,
    pub action: Action,
    pub true_label: String,
    pub predicted: Option<String>,
    pub correct: bool,
    pub known_categories: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentLog {
    pub iterations: Vec<Iteration>,
    pub stop: StopCondition,
}

impl ExperimentLog {
    /// Tab-separated lines `index action true predicted correct known`
    /// (unknown predictions as `-`), then a `# stop=...` footer.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# index\taction\ttrue\tpredicted\tcorrect\tknown\n");
        for it in &self.iterations {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                it.index,
                it.action.as_str(),
                it.true_label,
                it.predicted.as_deref().unwrap_or("-"),
                u8::from(it.correct),
                it.known_categories
            ));
        }
        out.push_str(&format!(
            "# stop={} iterations={}\n",
            self.stop,
            self.iterations.len()
        ));
        out
    }

    /// Instances stored by this run: every teach and correct step.
    pub fn stored_instances(&self) -> usize {
        self.iterations
            .iter()
            .filter(|i| i.action != Action::Ask)
            .count()
    }
}

/// Protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub tau: f64,
    pub breakpoint: usize,
    pub window_multiplier: usize,
    pub window_floor: usize,
    /// Instances taught when a category is introduced.
    pub initial_teach: usize,
    /// Introduce categories in a per-seed random order instead of dataset
    /// order.
    pub shuffle_categories: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            tau: 0.67,
            breakpoint: 100,
            window_multiplier: 3,
            window_floor: 10,
            initial_teach: 1,
            shuffle_categories: false,
        }
    }
}

impl ProtocolConfig {
    pub fn window(&self, known: usize) -> usize {
        (self.window_multiplier * known).max(self.window_floor)
    }
}

struct Pool<'a> {
    label: &'a str,
    unseen: Vec<&'a Sample>,
}

/// Runs the protocol against a fresh [`CategoryStore`] and returns the log
/// together with the final store.
pub fn run_simulated_teacher(
    data: &LabeledDataset<Sample>,
    config: &ProtocolConfig,
    distance: Distance,
    seed: u64,
) -> Result<(ExperimentLog, CategoryStore)> {
    let first = data
        .iter()
        .next()
        .ok_or_else(|| Error::Dataset("dataset is empty".into()))?
        .1;
    let mut store = CategoryStore::for_descriptor(&first.descriptor, distance);
    let log = run_protocol(data, &mut store, config, seed)?;
    Ok((log, store))
}

/// Runs the protocol with any agent. Fully determined by
/// `(data, config, seed)` and the agent's behaviour.
pub fn run_protocol<A: Agent>(
    data: &LabeledDataset<Sample>,
    agent: &mut A,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<ExperimentLog> {
    if config.initial_teach == 0 {
        return Err(Error::InvalidArgument("initial_teach must be at least 1".into()));
    }
    if !data
        .categories()
        .iter()
        .any(|(_, v)| v.len() > config.initial_teach)
    {
        return Err(Error::Dataset(format!(
            "no category has more than {} instances; the protocol cannot start",
            config.initial_teach
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.num_categories()).collect();
    if config.shuffle_categories {
        order.shuffle(&mut rng);
    }
    // a category that cannot be asked about after its initial teach would end
    // the run immediately, so start with the first one that can
    if let Some(p) = order
        .iter()
        .position(|&c| data.categories()[c].1.len() > config.initial_teach)
    {
        let c = order.remove(p);
        order.insert(0, c);
    }
    let mut pending: VecDeque<usize> = order.into();

    let mut known: Vec<Pool> = Vec::new();
    let mut iterations: Vec<Iteration> = Vec::new();
    let mut phase: VecDeque<bool> = VecDeque::new();

    let stop = 'run: loop {
        // introduce the next category
        let Some(c) = pending.pop_front() else {
            break StopCondition::LackOfData;
        };
        let (label, items) = &data.categories()[c];
        let mut unseen: Vec<&Sample> = items.iter().collect();
        unseen.shuffle(&mut rng);
        let count = known.len() + 1;
        for _ in 0..config.initial_teach.min(unseen.len()) {
            let s = unseen.pop().expect("checked length");
            agent.learn(label, s)?;
            iterations.push(Iteration {
                index: iterations.len(),
                action: Action::Teach,
                true_label: label.clone(),
                predicted: None,
                correct: false,
                known_categories: count,
            });
        }
        known.push(Pool { label, unseen });
        phase.clear();
        let mut asks_since_intro = 0usize;

        loop {
            let open: Vec<usize> = (0..known.len())
                .filter(|&k| !known[k].unseen.is_empty())
                .collect();
            if open.is_empty() {
                break 'run StopCondition::LackOfData;
            }
            let k = open[rng.random_range(0..open.len())];
            let pool = &mut known[k];
            let pick = rng.random_range(0..pool.unseen.len());
            let sample = pool.unseen.swap_remove(pick);
            let truth = pool.label;

            let predicted = agent.predict(sample)?;
            let correct = predicted.as_deref() == Some(truth);
            iterations.push(Iteration {
                index: iterations.len(),
                action: Action::Ask,
                true_label: truth.to_string(),
                predicted: predicted.clone(),
                correct,
                known_categories: known.len(),
            });
            if !correct {
                agent.learn(truth, sample)?;
                iterations.push(Iteration {
                    index: iterations.len(),
                    action: Action::Correct,
                    true_label: truth.to_string(),
                    predicted,
                    correct: false,
                    known_categories: known.len(),
                });
            }
            phase.push_back(correct);
            asks_since_intro += 1;

            let w = config.window(known.len());
            while phase.len() > w {
                phase.pop_front();
            }
            if phase.len() == w {
                let acc = phase.iter().filter(|&&b| b).count() as f64 / w as f64;
                if acc > config.tau {
                    continue 'run;
                }
            }
            if asks_since_intro >= config.breakpoint {
                break 'run StopCondition::BreakpointReached;
            }
        }
    };

    Ok(ExperimentLog { iterations, stop })
}

/// Open-ended evaluation summary of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Question/correction iterations: asks plus corrections.
    pub qci: usize,
    /// Categories learned by the end of the run.
    pub tlc: usize,
    /// Stored instances per learned category.
    pub aic: f64,
    /// Accuracy over every question of the run.
    pub gca: f64,
    /// Mean of the per-phase accuracies.
    pub apa: f64,
    pub stop: StopCondition,
}

/// Computes the metrics of a log; `stored_instances` is the agent's memory
/// size at the end of the run.
pub fn compute_metrics(log: &ExperimentLog, stored_instances: usize) -> Result<Metrics> {
    if log.iterations.is_empty() {
        return Err(Error::InvalidArgument("empty experiment log".into()));
    }
    let asks: Vec<&Iteration> = log
        .iterations
        .iter()
        .filter(|i| i.action == Action::Ask)
        .collect();
    let corrections = log
        .iterations
        .iter()
        .filter(|i| i.action == Action::Correct)
        .count();
    let tlc = log
        .iterations
        .iter()
        .map(|i| i.known_categories)
        .max()
        .unwrap_or(0);

    let ratio = |c: usize, n: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let gca = ratio(asks.iter().filter(|i| i.correct).count(), asks.len());

    // phases are the spans with a constant number of known categories
    let mut phases: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for a in &asks {
        let e = phases.entry(a.known_categories).or_default();
        e.0 += usize::from(a.correct);
        e.1 += 1;
    }
    let apa = if phases.is_empty() {
        0.0
    } else {
        phases.values().map(|&(c, n)| ratio(c, n)).sum::<f64>() / phases.len() as f64
    };

    Ok(Metrics {
        qci: asks.len() + corrections,
        tlc,
        aic: ratio(stored_instances, tlc),
        gca,
        apa,
        stop: log.stop,
    })
}

impl Metrics {
    pub fn to_kv(&self) -> String {
        format!(
            "QCI={}\nTLC={}\nAIC={}\nGCA={}\nAPA={}\nstop={}\n",
            self.qci, self.tlc, self.aic, self.gca, self.apa, self.stop
        )
    }
}

/// Mean metrics over several runs (the ALC column is the mean TLC).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub qci: f64,
    pub alc: f64,
    pub aic: f64,
    pub gca: f64,
    pub apa: f64,
    pub lack_of_data: usize,
}

pub fn aggregate(runs: &[Metrics]) -> Aggregate {
    let n = runs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&Metrics) -> f64| runs.iter().map(f).sum::<f64>() / n;
    Aggregate {
        runs: runs.len(),
        qci: mean(&|m| m.qci as f64),
        alc: mean(&|m| m.tlc as f64),
        aic: mean(&|m| m.aic),
        gca: mean(&|m| m.gca),
        apa: mean(&|m| m.apa),
        lack_of_data: runs
            .iter()
            .filter(|m| m.stop == StopCondition::LackOfData)
            .count(),
    }
}

/// Offline evaluation result.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineReport {
    /// Correct test instances over all test instances.
    pub aia: f64,
    /// Mean of per-class accuracies.
    pub aca: f64,
    /// Sorted union of train and test labels; indexes the confusion matrix.
    pub labels: Vec<String>,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<usize>>,
}

impl OfflineReport {
    /// Each non-empty row divided by its sum.
    pub fn normalized_confusion(&self) -> Vec<Vec<f64>> {
        self.confusion
            .iter()
            .map(|row| {
                let n: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
                    .collect()
            })
            .collect()
    }

    pub fn per_class_accuracy(&self) -> Vec<(String, f64, usize)> {
        self.confusion
            .iter()
            .enumerate()
            .filter_map(|(i, row)| {
                let n: usize = row.iter().sum();
                (n > 0).then(|| (self.labels[i].clone(), row[i] as f64 / n as f64, n))
            })
            .collect()
    }
}

/// Teaches every training sample, classifies every test sample.
pub fn offline_eval(
    train: &LabeledDataset<Sample>,
    test: &LabeledDataset<Sample>,
    distance: Distance,
) -> Result<OfflineReport> {
    let first = train
        .iter()
        .next()
        .ok_or_else(|| Error::Dataset("training set is empty".into()))?
        .1;
    let mut store = CategoryStore::for_descriptor(&first.descriptor, distance);
    for (label, s) in train.iter() {
        store.teach(label, &s.descriptor)?;
    }
    for label in test.labels() {
        if store.instances(label).is_none() {
            return Err(Error::UnknownLabel(label.to_string()));
        }
    }

    let labels: Vec<String> = store.labels().map(str::to_string).collect();
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let (mut correct, mut total) = (0usize, 0usize);
    for (label, s) in test.iter() {
        let predicted = store
            .classify(&s.descriptor)?
            .predicted
            .expect("store is non-empty");
        confusion[index[label]][index[predicted.as_str()]] += 1;
        correct += usize::from(predicted == label);
        total += 1;
    }

    let mut report = OfflineReport {
        aia: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        aca: 0.0,
        labels,
        confusion,
    };
    let per_class = report.per_class_accuracy();
    report.aca = if per_class.is_empty() {
        0.0
    } else {
        per_class.iter().map(|(_, a, _)| a).sum::<f64>() / per_class.len() as f64
    };
    Ok(report)
}

impl FromStr for StopCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lack_of_data" => Ok(StopCondition::LackOfData),
            "breakpoint_reached" => Ok(StopCondition::BreakpointReached),
            _ => Err(Error::InvalidArgument(format!("unknown stop condition `{s}`"))),
        }
    }
}
