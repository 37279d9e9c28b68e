//! Analysis registry, dependency-ordered planning, and run-once execution.
//!
//! Analyses are registered by name with their dependency names. [`Manager::plan`]
//! expands a request to its transitive dependency closure and orders it
//! topologically (lexicographic tie-breaking, so plans are deterministic);
//! [`Manager::execute`] runs each planned analysis at most once, handing it the
//! design (if it declared the need) and its dependencies' completed results,
//! and caches every result so later plans reuse them.
//!
//! [`builtin_manager`] is the central registration point: it returns a manager
//! with every built-in analysis registered. [`Manager::register`] doubles as the
//! extension hook for user analyses.

use std::any::Any;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::ir::Design;
use crate::report::Report;

/// A completed analysis result, shared between the cache and dependents.
pub type ResultHandle = Arc<dyn Any + Send + Sync>;

/// Everything an analysis run hands back: its result value (cached for
/// dependents) and any diagnostics it emitted.
pub struct AnalysisOutput {
    result: ResultHandle,
    reports: Vec<Report>,
}

impl AnalysisOutput {
    /// Wraps a result value. Analyses with nothing to report use this alone.
    pub fn new<T: Any + Send + Sync>(value: T) -> AnalysisOutput {
        AnalysisOutput { result: Arc::new(value), reports: Vec::new() }
    }

    /// Attaches diagnostics to the output.
    pub fn with_reports(mut self, reports: Vec<Report>) -> AnalysisOutput {
        self.reports = reports;
        self
    }
}

/// What an analysis sees while running: the design (when declared), its
/// declared dependencies' results, and the option map.
pub struct RunInput<'a> {
    analysis: &'a str,
    design: Option<&'a Design>,
    deps: BTreeMap<&'a str, ResultHandle>,
    options: &'a BTreeMap<String, String>,
}

impl<'a> RunInput<'a> {
    /// The design under analysis.
    ///
    /// Panics if the analysis did not declare `needs_design`; that is a bug in
    /// the analysis, not a runtime condition.
    pub fn design(&self) -> &'a Design {
        self.design.unwrap_or_else(|| {
            panic!("analysis `{}` did not declare that it needs the design", self.analysis)
        })
    }

    /// A dependency's result, downcast to its concrete type.
    ///
    /// Panics if `name` was not declared as a dependency or if `T` is not the
    /// type that analysis produced; both are bugs in the calling analysis.
    pub fn dep<T: Any + Send + Sync>(&self, name: &str) -> &T {
        let handle = self.deps.get(name).unwrap_or_else(|| {
            panic!("analysis `{}` did not declare a dependency on `{name}`", self.analysis)
        });
        handle.downcast_ref::<T>().unwrap_or_else(|| {
            panic!("analysis `{}` asked for `{name}` at the wrong result type", self.analysis)
        })
    }

    /// Like [`RunInput::dep`], but shares ownership, letting a result embed an
    /// upstream result it stays consistent with.
    pub fn dep_arc<T: Any + Send + Sync>(&self, name: &str) -> Arc<T> {
        let handle = self.deps.get(name).cloned().unwrap_or_else(|| {
            panic!("analysis `{}` did not declare a dependency on `{name}`", self.analysis)
        });
        handle.downcast::<T>().unwrap_or_else(|_| {
            panic!("analysis `{}` asked for `{name}` at the wrong result type", self.analysis)
        })
    }

    /// Looks up an option by exact name. Analyses parse their own values.
    pub fn option(&self, name: &str) -> Option<&str> {
        self.options.get(name).map(String::as_str)
    }
}

/// The run entry point of an analysis. A returned `Err` aborts execution with
/// the analysis named; diagnostics that should not abort go in the output.
pub type RunFn = Box<dyn Fn(&RunInput) -> Result<AnalysisOutput, String> + Send + Sync>;

/// Renders a cached result as deterministic text, one record per line, for
/// the `--dump` flag and golden tests.
pub type DumpFn = Box<dyn Fn(&Design, &(dyn Any + Send + Sync)) -> String + Send + Sync>;

/// A registered analysis: its name, dependency names, whether its run needs
/// direct access to the design, and the run entry point.
pub struct AnalysisDescriptor {
    name: String,
    deps: Vec<String>,
    needs_design: bool,
    run: RunFn,
    dump: Option<DumpFn>,
}

impl AnalysisDescriptor {
    pub fn new(
        name: impl Into<String>,
        deps: &[&str],
        needs_design: bool,
        run: impl Fn(&RunInput) -> Result<AnalysisOutput, String> + Send + Sync + 'static,
    ) -> AnalysisDescriptor {
        AnalysisDescriptor {
            name: name.into(),
            deps: deps.iter().map(|d| d.to_string()).collect(),
            needs_design,
            run: Box::new(run),
            dump: None,
        }
    }

    /// Attaches a typed text renderer for the analysis result. `render` sees
    /// the result downcast to `T`; registration is the only place that knows
    /// the concrete type.
    pub fn with_dump<T: Any + Send + Sync>(
        mut self,
        render: impl Fn(&Design, &T) -> String + Send + Sync + 'static,
    ) -> AnalysisDescriptor {
        let name = self.name.clone();
        self.dump = Some(Box::new(move |design, result| {
            let typed = result
                .downcast_ref::<T>()
                .unwrap_or_else(|| panic!("dump for `{name}` registered at the wrong type"));
            render(design, typed)
        }));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn deps(&self) -> &[String] {
        &self.deps
    }

    pub fn needs_design(&self) -> bool {
        self.needs_design
    }
}

impl fmt::Debug for AnalysisDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalysisDescriptor")
            .field("name", &self.name)
            .field("deps", &self.deps)
            .field("needs_design", &self.needs_design)
            .finish_non_exhaustive()
    }
}

/// An ordered list of analysis names in which every analysis appears after
/// all of its dependencies, with no duplicates. Built only by [`Manager::plan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionPlan {
    names: Vec<String>,
}

impl ExecutionPlan {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Errors from registration, planning, or execution.
#[derive(Debug, thiserror::Error)]
pub enum ManagerError {
    #[error("analysis `{0}` is already registered")]
    DuplicateName(String),
    #[error("unknown analysis `{name}`; registered analyses: {}", registered.join(", "))]
    UnknownAnalysis { name: String, registered: Vec<String> },
    #[error("dependency cycle among analyses: {}", render_cycle(cycle))]
    DependencyCycle { cycle: Vec<String> },
    #[error("plan runs `{analysis}` before its dependency `{dependency}`")]
    MissingDependency { analysis: String, dependency: String },
    #[error("analysis `{name}` failed: {message}")]
    AnalysisFailed { name: String, message: String },
}

fn render_cycle(cycle: &[String]) -> String {
    let mut s = cycle.join(" -> ");
    if let Some(first) = cycle.first() {
        s.push_str(" -> ");
        s.push_str(first);
    }
    s
}

/// Analysis registry plus result cache. The cache only ever holds results
/// whose dependencies are also cached, because execution follows plan order.
#[derive(Default)]
pub struct Manager {
    registry: BTreeMap<String, AnalysisDescriptor>,
    cache: BTreeMap<String, ResultHandle>,
    reports: Vec<Report>,
    options: BTreeMap<String, String>,
    run_counts: BTreeMap<String, usize>,
}

impl Manager {
    pub fn new() -> Manager {
        Manager::default()
    }

    /// Registers an analysis. This is also the extension hook: user analyses
    /// register through it after [`builtin_manager`] sets up the built-ins.
    pub fn register(&mut self, d: AnalysisDescriptor) -> Result<(), ManagerError> {
        if self.registry.contains_key(&d.name) {
            return Err(ManagerError::DuplicateName(d.name.clone()));
        }
        self.registry.insert(d.name.clone(), d);
        Ok(())
    }

    /// Registered analysis names, sorted.
    pub fn names(&self) -> Vec<&str> {
        self.registry.keys().map(String::as_str).collect()
    }

    pub fn descriptor(&self, name: &str) -> Option<&AnalysisDescriptor> {
        self.registry.get(name)
    }

    /// Sets one analysis option (free-form `name=value` text; each analysis
    /// parses its own options).
    pub fn set_option(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.options.insert(name.into(), value.into());
    }

    /// Expands `requested` to its transitive dependency closure and orders it
    /// topologically. Ties among ready analyses break lexicographically, so
    /// the plan is deterministic.
    pub fn plan(&self, requested: &[&str]) -> Result<ExecutionPlan, ManagerError> {
        let unknown = |name: &str| ManagerError::UnknownAnalysis {
            name: name.to_string(),
            registered: self.registry.keys().cloned().collect(),
        };

        // Dependency closure of the request.
        let mut closure = BTreeSet::new();
        let mut work: Vec<&str> = requested.to_vec();
        while let Some(name) = work.pop() {
            let d = self.registry.get(name).ok_or_else(|| unknown(name))?;
            if closure.insert(d.name.as_str()) {
                work.extend(d.deps.iter().map(String::as_str));
            }
        }

        // Kahn's algorithm over the induced subgraph, smallest ready name first.
        let mut pending: BTreeMap<&str, BTreeSet<&str>> = closure
            .iter()
            .map(|&n| {
                let deps = self.registry[n].deps.iter().map(String::as_str).collect();
                (n, deps)
            })
            .collect();
        let mut ready: BTreeSet<&str> = pending
            .iter()
            .filter(|(_, deps)| deps.is_empty())
            .map(|(&n, _)| n)
            .collect();
        for n in &ready {
            pending.remove(*n);
        }
        let mut plan = Vec::with_capacity(closure.len());
        while let Some(&name) = ready.iter().next() {
            ready.remove(name);
            plan.push(name.to_string());
            let mut now_ready = Vec::new();
            for (&n, deps) in pending.iter_mut() {
                deps.remove(name);
                if deps.is_empty() {
                    now_ready.push(n);
                }
            }
            for n in now_ready {
                pending.remove(n);
                ready.insert(n);
            }
        }
        if !pending.is_empty() {
            return Err(ManagerError::DependencyCycle { cycle: self.find_cycle(&pending) });
        }
        Ok(ExecutionPlan { names: plan })
    }

    /// Extracts one elementary cycle from the leftover nodes of a stalled
    /// topological sort. Every leftover node has at least one unsatisfied
    /// dependency among the leftovers, so following smallest such dependencies
    /// must revisit a node.
    fn find_cycle(&self, pending: &BTreeMap<&str, BTreeSet<&str>>) -> Vec<String> {
        let start = *pending.keys().next().expect("cycle extraction needs leftovers");
        let mut path: Vec<&str> = vec![start];
        let mut seen: BTreeMap<&str, usize> = BTreeMap::from([(start, 0)]);
        loop {
            let cur = *path.last().expect("path never empties");
            let next = *pending[cur].iter().next().expect("leftover node has a leftover dep");
            if let Some(&at) = seen.get(next) {
                let mut cycle: Vec<String> = path[at..].iter().map(|s| s.to_string()).collect();
                // The walk followed depends-on edges; reversed, the arrows
                // read in must-run-before order.
                cycle.reverse();
                // Rotate so the cycle starts at its smallest member; the
                // presentation stays deterministic no matter where we entered.
                let min = cycle
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.cmp(b.1))
                    .map(|(i, _)| i)
                    .expect("cycle is non-empty");
                cycle.rotate_left(min);
                return cycle;
            }
            seen.insert(next, path.len());
            path.push(next);
        }
    }

    /// Runs every analysis in the plan that has no cached result yet, in plan
    /// order. Each run sees the design (if declared) and its dependencies'
    /// results; its result is cached and its diagnostics are appended in
    /// emission order. The first failure aborts with the analysis named, and
    /// downstream analyses do not run.
    pub fn execute(&mut self, plan: &ExecutionPlan, design: &Design) -> Result<(), ManagerError> {
        for name in &plan.names {
            if self.cache.contains_key(name) {
                continue;
            }
            let d = self.registry.get(name).ok_or_else(|| ManagerError::UnknownAnalysis {
                name: name.clone(),
                registered: self.registry.keys().cloned().collect(),
            })?;
            let mut deps = BTreeMap::new();
            for dep in &d.deps {
                let handle =
                    self.cache.get(dep).ok_or_else(|| ManagerError::MissingDependency {
                        analysis: name.clone(),
                        dependency: dep.clone(),
                    })?;
                deps.insert(dep.as_str(), Arc::clone(handle));
            }
            let input = RunInput {
                analysis: name,
                design: d.needs_design.then_some(design),
                deps,
                options: &self.options,
            };
            *self.run_counts.entry(name.clone()).or_insert(0) += 1;
            let output = (d.run)(&input).map_err(|message| ManagerError::AnalysisFailed {
                name: name.clone(),
                message,
            })?;
            self.reports.extend(output.reports);
            self.cache.insert(name.clone(), output.result);
        }
        Ok(())
    }

    /// A cached result, downcast to its concrete type. `None` if the analysis
    /// has not run or `T` is not its result type.
    pub fn result<T: Any + Send + Sync>(&self, name: &str) -> Option<&T> {
        self.cache.get(name).and_then(|handle| handle.downcast_ref::<T>())
    }

    pub fn is_cached(&self, name: &str) -> bool {
        self.cache.contains_key(name)
    }

    /// Renders a cached result as text. `None` when the analysis has not run
    /// or registered no dump renderer.
    pub fn dump(&self, name: &str, design: &Design) -> Option<String> {
        let d = self.registry.get(name)?;
        let render = d.dump.as_ref()?;
        let handle = self.cache.get(name)?;
        Some(render(design, handle.as_ref()))
    }

    /// Whether the analysis registered a dump renderer.
    pub fn can_dump(&self, name: &str) -> bool {
        self.registry.get(name).is_some_and(|d| d.dump.is_some())
    }

    /// All diagnostics emitted so far, in emission order.
    pub fn reports(&self) -> &[Report] {
        &self.reports
    }

    /// How many times each analysis has actually run (cache hits do not
    /// count). Exercised by the run-once tests.
    pub fn run_counts(&self) -> &BTreeMap<String, usize> {
        &self.run_counts
    }
}

/// The result of the `hello` analysis: the greeting it computed.
pub type HelloResult = String;

/// The result of the `dump` analysis: the text it printed.
pub type DumpResult = String;

fn register_demo_analyses(m: &mut Manager) -> Result<(), ManagerError> {
    m.register(AnalysisDescriptor::new("hello", &[], true, |input| {
        let _ = input.design();
        Ok(AnalysisOutput::new::<HelloResult>("Hello".to_string()))
    }))?;
    m.register(AnalysisDescriptor::new("dump", &["hello"], false, |input| {
        let text = input.dep::<HelloResult>("hello").clone();
        println!("{text}");
        Ok(AnalysisOutput::new::<DumpResult>(text))
    }))?;
    Ok(())
}

/// The central registration point: a manager with every built-in analysis
/// registered. Register user analyses on the returned manager to extend it.
pub fn builtin_manager() -> Manager {
    let mut m = Manager::new();
    register_demo_analyses(&mut m).expect("built-in names are unique");
    crate::dataflow::register(&mut m).expect("built-in names are unique");
    crate::hwinfer::register(&mut m).expect("built-in names are unique");
    crate::clients::register(&mut m).expect("built-in names are unique");
    m
}
