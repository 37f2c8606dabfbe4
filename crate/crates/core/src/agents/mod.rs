//! Navigation models as per-step state machines.
//!
//! All three models share [`AgentState`]; they differ only in how a step is
//! drawn:
//!
//! * **PageRank**: follow a uniform random link, or with probability `p_t`
//!   jump to a uniformly random page.
//! * **BookRank**: like PageRank, but jumps go to a bookmark drawn from the
//!   agent's visit-ranked list with probability `∝ rank^-beta`.
//! * **ABC**: agents carry an energy budget. Forward clicks cost `c_f`, back
//!   clicks `c_b`; the first visit to a page in a session refunds its
//!   relevance `Δ`, which drifts multiplicatively along the click path. The
//!   session ends (bookmark jump) once energy is exhausted.
//!
//! Every agent begins at a uniformly random page.

mod bookmarks;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

pub use bookmarks::{rank_probabilities, BookmarkList};

use crate::error::{Error, Result};
use crate::graph::{NodeId, WebGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    PageRank,
    BookRank,
    Abc,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::PageRank, Model::BookRank, Model::Abc];

    pub fn name(self) -> &'static str {
        match self {
            Model::PageRank => "pagerank",
            Model::BookRank => "bookrank",
            Model::Abc => "abc",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pagerank" => Ok(Model::PageRank),
            "bookrank" => Ok(Model::BookRank),
            "abc" => Ok(Model::Abc),
            other => Err(Error::config(format!(
                "unknown model {other:?} (expected pagerank, bookrank or abc)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Teleport probability (PageRank, BookRank).
    pub p_t: f64,
    /// Bookmark rank exponent.
    pub beta: f64,
    /// Back-button probability (ABC).
    pub p_b: f64,
    /// Energy at session start (ABC).
    pub e0: f64,
    pub c_f: f64,
    pub c_b: f64,
    /// Half-width of the relative relevance perturbation (ABC).
    pub eta: f64,
    /// Relevance of a session's first page (ABC).
    pub delta0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            p_t: 0.15,
            beta: 1.33,
            p_b: 0.5,
            e0: 0.5,
            c_f: 1.0,
            c_b: 0.5,
            eta: 0.15,
            delta0: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, what: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(what.to_string()))
            }
        }
        check((0.0..=1.0).contains(&self.p_t), "p_t must lie in [0, 1]")?;
        check((0.0..1.0).contains(&self.p_b), "p_b must lie in [0, 1)")?;
        check(self.beta > 0.0 && self.beta.is_finite(), "beta must be > 0")?;
        check(self.c_f >= 0.0 && self.c_f.is_finite(), "c_f must be >= 0")?;
        check(self.c_b >= 0.0 && self.c_b.is_finite(), "c_b must be >= 0")?;
        check((0.0..1.0).contains(&self.eta), "eta must lie in [0, 1)")?;
        check(self.delta0 > 0.0 && self.delta0.is_finite(), "delta0 must be > 0")?;
        check(self.e0.is_finite(), "e0 must be finite")?;
        Ok(())
    }
}

/// What one step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    /// Link click.
    Forward { from: NodeId, to: NodeId },
    /// Back button; always to a page already seen this session.
    Back { from: NodeId, to: NodeId },
    /// Jump that ends the current session (if any) and starts a new one.
    Teleport { to: NodeId },
}

impl StepOutcome {
    pub fn target(&self) -> NodeId {
        match *self {
            StepOutcome::Forward { to, .. }
            | StepOutcome::Back { to, .. }
            | StepOutcome::Teleport { to } => to,
        }
    }
}

/// Random stream of one agent, derived from the master seed and agent id
/// so results do not depend on which worker runs the agent.
pub fn agent_rng(master_seed: u64, agent: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(agent as u64);
    rng
}

#[derive(Clone, Debug)]
pub struct AgentState {
    id: u32,
    current: Option<NodeId>,
    bookmarks: BookmarkList,
    energy: f64,
    history: Vec<NodeId>,
    session_delta: FxHashMap<NodeId, f64>,
    session_seen: FxHashSet<NodeId>,
    sessions_started: u64,
    rng: ChaCha8Rng,
}

impl AgentState {
    pub fn new(id: u32, master_seed: u64) -> Self {
        AgentState::with_rng(id, agent_rng(master_seed, id))
    }

    pub fn with_rng(id: u32, rng: ChaCha8Rng) -> Self {
        AgentState {
            id,
            current: None,
            bookmarks: BookmarkList::new(),
            energy: 0.0,
            history: Vec::new(),
            session_delta: FxHashMap::default(),
            session_seen: FxHashSet::default(),
            sessions_started: 0,
            rng,
        }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn current(&self) -> Option<NodeId> {
        self.current
    }

    pub fn bookmarks(&self) -> &BookmarkList {
        &self.bookmarks
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn history(&self) -> &[NodeId] {
        &self.history
    }

    pub fn delta(&self, page: NodeId) -> Option<f64> {
        self.session_delta.get(&page).copied()
    }

    pub fn has_seen(&self, page: NodeId) -> bool {
        self.session_seen.contains(&page)
    }

    pub fn sessions_started(&self) -> u64 {
        self.sessions_started
    }

    /// Advances the agent by one step of `model`.
    pub fn step(&mut self, model: Model, g: &WebGraph, params: &ModelParams) -> StepOutcome {
        match model {
            Model::PageRank => self.pagerank_step(g, params),
            Model::BookRank => self.bookrank_step(g, params),
            Model::Abc => self.abc_step(g, params),
        }
    }

    pub fn pagerank_step(&mut self, g: &WebGraph, params: &ModelParams) -> StepOutcome {
        match self.current {
            Some(u) if !self.rng.random_bool(params.p_t) => {
                let v = self.pick_neighbor(g, u);
                self.session_seen.insert(v);
                self.current = Some(v);
                StepOutcome::Forward { from: u, to: v }
            }
            _ => {
                let v = self.uniform_page(g);
                self.begin_session(v);
                StepOutcome::Teleport { to: v }
            }
        }
    }

    pub fn bookrank_step(&mut self, g: &WebGraph, params: &ModelParams) -> StepOutcome {
        match self.current {
            None => {
                let v = self.uniform_page(g);
                self.begin_session(v);
                self.bookmarks.touch(v);
                StepOutcome::Teleport { to: v }
            }
            Some(u) => {
                if self.rng.random_bool(params.p_t) {
                    let v = self.bookmark_jump_target(params.beta);
                    self.begin_session(v);
                    self.bookmarks.touch(v);
                    StepOutcome::Teleport { to: v }
                } else {
                    let v = self.pick_neighbor(g, u);
                    self.session_seen.insert(v);
                    self.bookmarks.touch(v);
                    self.current = Some(v);
                    StepOutcome::Forward { from: u, to: v }
                }
            }
        }
    }

    pub fn abc_step(&mut self, g: &WebGraph, params: &ModelParams) -> StepOutcome {
        let u = match self.current {
            Some(u) if self.energy > 0.0 => u,
            started => {
                let v = match started {
                    None => self.uniform_page(g),
                    Some(_) => self.bookmark_jump_target(params.beta),
                };
                self.begin_session(v);
                self.energy = params.e0;
                self.session_delta.insert(v, params.delta0);
                self.bookmarks.touch(v);
                return StepOutcome::Teleport { to: v };
            }
        };

        // at the session root there is nothing to go back to; click forward
        if self.rng.random_bool(params.p_b) {
            if let Some(prev) = self.history.pop() {
                self.energy -= params.c_b;
                self.current = Some(prev);
                return StepOutcome::Back { from: u, to: prev };
            }
        }

        let v = self.pick_neighbor(g, u);
        self.history.push(u);
        if self.session_seen.insert(v) {
            let eps = params.eta * (2.0 * self.rng.random::<f64>() - 1.0);
            let delta = self.session_delta[&u] * (1.0 + eps);
            self.session_delta.insert(v, delta);
            self.energy += delta - params.c_f;
        } else {
            self.energy -= params.c_f;
        }
        self.bookmarks.touch(v);
        self.current = Some(v);
        StepOutcome::Forward { from: u, to: v }
    }

    fn begin_session(&mut self, root: NodeId) {
        self.history.clear();
        self.session_delta.clear();
        self.session_seen.clear();
        self.session_seen.insert(root);
        self.current = Some(root);
        self.sessions_started += 1;
    }

    fn uniform_page(&mut self, g: &WebGraph) -> NodeId {
        NodeId(self.rng.random_range(0..g.n() as u32))
    }

    fn pick_neighbor(&mut self, g: &WebGraph, u: NodeId) -> NodeId {
        let adj = g.neighbors(u);
        debug_assert!(!adj.is_empty(), "dangling node {u}");
        adj[self.rng.random_range(0..adj.len())]
    }

    fn bookmark_jump_target(&mut self, beta: f64) -> NodeId {
        self.bookmarks
            .sample(beta, &mut self.rng)
            .expect("bookmark jump with an empty bookmark list")
    }
}
