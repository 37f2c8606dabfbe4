//! Session trees, the browser-cache rule, and traffic tallies.
//!
//! A session is a tree of first visits rooted at its starting page. Within a
//! session only the first request for a page is observable (later ones are
//! served from cache), so only first visits add tree nodes and traffic.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;

use crate::agents::StepOutcome;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::metrics::entropy_bits;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug)]
pub struct SessionTree {
    root: NodeId,
    parent: FxHashMap<NodeId, NodeId>,
    depth: FxHashMap<NodeId, u32>,
    max_depth: u32,
    clicks: u64,
}

impl SessionTree {
    pub fn new(root: NodeId) -> Self {
        let mut depth = FxHashMap::default();
        depth.insert(root, 0);
        SessionTree {
            root,
            parent: FxHashMap::default(),
            depth,
            max_depth: 0,
            clicks: 0,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Unique pages in the tree.
    pub fn size(&self) -> u64 {
        self.depth.len() as u64
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn contains(&self, page: NodeId) -> bool {
        self.depth.contains_key(&page)
    }

    pub fn depth_of(&self, page: NodeId) -> Option<u32> {
        self.depth.get(&page).copied()
    }

    pub fn parent_of(&self, page: NodeId) -> Option<NodeId> {
        self.parent.get(&page).copied()
    }

    /// Non-jump steps taken in this session, cached or not.
    pub fn clicks(&self) -> u64 {
        self.clicks
    }

    pub fn add_click(&mut self) {
        self.clicks += 1;
    }

    /// Adds `child` under `parent`. Returns `false` (and changes nothing) when
    /// `child` is already in the tree.
    ///
    /// Panics if `parent` is not in the tree.
    pub fn attach(&mut self, parent: NodeId, child: NodeId) -> bool {
        if self.contains(child) {
            return false;
        }
        let d = self.depth[&parent] + 1;
        self.parent.insert(child, parent);
        self.depth.insert(child, d);
        self.max_depth = self.max_depth.max(d);
        true
    }

    pub fn pages(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.depth.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parent.iter().map(|(&c, &p)| (p, c))
    }
}

/// Summary of one closed session.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionDescriptor {
    pub user: UserId,
    /// 0-based position of the session among the user's sessions.
    pub index: u64,
    pub root: NodeId,
    pub size: u64,
    pub depth: u32,
    pub clicks: u64,
}

/// Closes a session tree into its descriptor.
pub fn close_session(tree: &SessionTree, user: UserId, index: u64) -> SessionDescriptor {
    SessionDescriptor {
        user,
        index,
        root: tree.root(),
        size: tree.size(),
        depth: tree.max_depth(),
        clicks: tree.clicks(),
    }
}

/// Mergeable traffic counters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrafficTally {
    pub page_visits: FxHashMap<NodeId, u64>,
    pub link_visits: FxHashMap<(NodeId, NodeId), u64>,
    pub session_starts: FxHashMap<NodeId, u64>,
    pub per_user_visits: BTreeMap<UserId, FxHashMap<NodeId, u64>>,
}

impl TrafficTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_start(&mut self, user: UserId, page: NodeId, visit_key: NodeId) {
        *self.session_starts.entry(page).or_default() += 1;
        *self.page_visits.entry(page).or_default() += 1;
        self.record_user_visit(user, visit_key);
    }

    pub fn record_link(&mut self, user: UserId, from: NodeId, to: NodeId, visit_key: NodeId) {
        *self.page_visits.entry(to).or_default() += 1;
        *self.link_visits.entry((from, to)).or_default() += 1;
        self.record_user_visit(user, visit_key);
    }

    fn record_user_visit(&mut self, user: UserId, key: NodeId) {
        *self
            .per_user_visits
            .entry(user)
            .or_default()
            .entry(key)
            .or_default() += 1;
    }

    /// Key-wise sum.
    pub fn merge(&mut self, other: TrafficTally) {
        fn add<K: std::hash::Hash + Eq>(into: &mut FxHashMap<K, u64>, from: FxHashMap<K, u64>) {
            if into.is_empty() {
                *into = from;
                return;
            }
            for (k, v) in from {
                *into.entry(k).or_default() += v;
            }
        }
        add(&mut self.page_visits, other.page_visits);
        add(&mut self.link_visits, other.link_visits);
        add(&mut self.session_starts, other.session_starts);
        for (user, visits) in other.per_user_visits {
            add(self.per_user_visits.entry(user).or_default(), visits);
        }
    }

    pub fn total_sessions(&self) -> u64 {
        self.session_starts.values().sum()
    }

    pub fn total_page_visits(&self) -> u64 {
        self.page_visits.values().sum()
    }

    pub fn total_link_visits(&self) -> u64 {
        self.link_visits.values().sum()
    }

    /// Shannon entropy in bits of `user`'s visit distribution.
    pub fn user_entropy(&self, user: UserId) -> Result<f64> {
        let visits = self
            .per_user_visits
            .get(&user)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| Error::Lookup(format!("user {user}")))?;
        Ok(entropy_bits(visits.values().copied()))
    }

    /// Entropies of all users, ascending by user.
    pub fn user_entropies(&self) -> Vec<(UserId, f64)> {
        self.per_user_visits
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&u, v)| (u, entropy_bits(v.values().copied())))
            .collect()
    }

    /// Removes and returns the per-user visit vectors, leaving the
    /// aggregate counters in place.
    pub fn take_user_visits(&mut self) -> BTreeMap<UserId, FxHashMap<NodeId, u64>> {
        std::mem::take(&mut self.per_user_visits)
    }
}

/// Applies step outcomes of one agent to its current session tree and tally.
#[derive(Clone, Debug)]
pub struct SessionRecorder {
    user: UserId,
    tree: Option<SessionTree>,
    next_index: u64,
    tally: TrafficTally,
}

/// Effect of one recorded step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Recorded {
    /// The session the step closed, if it was a jump.
    pub closed: Option<SessionDescriptor>,
    /// The request a browser would send for this step: `(referrer, target)`,
    /// with no referrer for jumps. `None` on cache hits and back clicks.
    pub request: Option<(Option<NodeId>, NodeId)>,
}

impl SessionRecorder {
    pub fn new(user: UserId) -> Self {
        SessionRecorder {
            user,
            tree: None,
            next_index: 0,
            tally: TrafficTally::new(),
        }
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn tree(&self) -> Option<&SessionTree> {
        self.tree.as_ref()
    }

    pub fn tally(&self) -> &TrafficTally {
        &self.tally
    }

    pub fn sessions_closed(&self) -> u64 {
        self.next_index
    }

    pub fn record(&mut self, outcome: StepOutcome) -> Result<Recorded> {
        match outcome {
            StepOutcome::Teleport { to } => {
                let closed = self.close();
                self.tree = Some(SessionTree::new(to));
                self.tally.record_start(self.user, to, to);
                Ok(Recorded {
                    closed,
                    request: Some((None, to)),
                })
            }
            StepOutcome::Forward { from, to } => {
                let tree = self.open_tree(from)?;
                tree.add_click();
                if tree.attach(from, to) {
                    self.tally.record_link(self.user, from, to, to);
                    Ok(Recorded {
                        closed: None,
                        request: Some((Some(from), to)),
                    })
                } else {
                    Ok(Recorded::default())
                }
            }
            StepOutcome::Back { from, to } => {
                let tree = self.open_tree(from)?;
                if !tree.contains(to) {
                    return Err(Error::Protocol(format!(
                        "back step to {to}, which is not in the current session"
                    )));
                }
                tree.add_click();
                Ok(Recorded::default())
            }
        }
    }

    fn open_tree(&mut self, from: NodeId) -> Result<&mut SessionTree> {
        let tree = self
            .tree
            .as_mut()
            .ok_or_else(|| Error::Protocol("click before any session started".into()))?;
        if !tree.contains(from) {
            return Err(Error::Protocol(format!(
                "click from {from}, which is not in the current session"
            )));
        }
        Ok(tree)
    }

    /// Closes the open session, if any.
    pub fn close(&mut self) -> Option<SessionDescriptor> {
        let tree = self.tree.take()?;
        let d = close_session(&tree, self.user, self.next_index);
        self.next_index += 1;
        Some(d)
    }

    pub fn into_tally(self) -> TrafficTally {
        self.tally
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const U: UserId = UserId(0);
    const A: NodeId = NodeId(1);
    const B: NodeId = NodeId(2);
    const C: NodeId = NodeId(3);

    fn fwd(from: NodeId, to: NodeId) -> StepOutcome {
        StepOutcome::Forward { from, to }
    }

    fn back(from: NodeId, to: NodeId) -> StepOutcome {
        StepOutcome::Back { from, to }
    }

    fn jump(to: NodeId) -> StepOutcome {
        StepOutcome::Teleport { to }
    }

    fn play(steps: &[StepOutcome]) -> (SessionRecorder, Vec<SessionDescriptor>) {
        let mut rec = SessionRecorder::new(U);
        let mut closed = Vec::new();
        for &s in steps {
            closed.extend(rec.record(s).unwrap().closed);
        }
        closed.extend(rec.close());
        (rec, closed)
    }

    #[test]
    fn chain() {
        let (rec, d) = play(&[jump(A), fwd(A, B), fwd(B, C)]);
        assert_eq!((d[0].size, d[0].depth, d[0].clicks), (3, 2, 2));
        let t = rec.tally();
        assert_eq!(t.link_visits.len(), 2);
        assert_eq!(t.link_visits[&(A, B)], 1);
        assert_eq!(t.link_visits[&(B, C)], 1);
    }

    #[test]
    fn branch_after_back() {
        let (_, d) = play(&[jump(A), fwd(A, B), back(B, A), fwd(A, C)]);
        assert_eq!((d[0].size, d[0].depth), (3, 1));
        assert_eq!(d[0].size as f64 / d[0].depth as f64, 3.0);
    }

    #[test]
    fn revisits_are_cache_hits() {
        let (rec, d) = play(&[jump(A), fwd(A, B), back(B, A), fwd(A, B)]);
        assert_eq!(d[0].size, 2);
        assert_eq!(rec.tally().page_visits[&B], 1);
        assert_eq!(rec.tally().link_visits[&(A, B)], 1);
    }

    #[test]
    fn cache_resets_between_sessions() {
        let (rec, d) = play(&[jump(A), fwd(A, B), jump(A), fwd(A, B)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].index, 1);
        let t = rec.tally();
        assert_eq!(t.page_visits[&A], 2);
        assert_eq!(t.page_visits[&B], 2);
        assert_eq!(t.session_starts[&A], 2);
        assert_eq!(t.total_sessions(), 2);
    }

    #[test]
    fn singleton_and_star_and_chain_shapes() {
        let (_, d) = play(&[jump(A)]);
        assert_eq!((d[0].size, d[0].depth), (1, 0));

        let k = 6u32;
        let mut steps = vec![jump(NodeId(0))];
        for i in 1..=k {
            steps.push(fwd(NodeId(0), NodeId(i)));
            steps.push(back(NodeId(i), NodeId(0)));
        }
        let (_, d) = play(&steps);
        assert_eq!((d[0].size, d[0].depth), (k as u64 + 1, 1));

        let mut steps = vec![jump(NodeId(0))];
        steps.extend((0..k).map(|i| fwd(NodeId(i), NodeId(i + 1))));
        let (_, d) = play(&steps);
        assert_eq!((d[0].size, d[0].depth), (k as u64 + 1, k));
    }

    #[test]
    fn click_before_session_is_protocol_error() {
        let mut rec = SessionRecorder::new(U);
        assert!(matches!(rec.record(fwd(A, B)), Err(Error::Protocol(_))));
        assert!(matches!(rec.record(back(A, B)), Err(Error::Protocol(_))));
        rec.record(jump(A)).unwrap();
        assert!(matches!(rec.record(fwd(C, B)), Err(Error::Protocol(_))));
        assert!(matches!(rec.record(back(A, C)), Err(Error::Protocol(_))));
    }

    #[test]
    fn requests_follow_the_cache() {
        let mut rec = SessionRecorder::new(U);
        assert_eq!(rec.record(jump(A)).unwrap().request, Some((None, A)));
        assert_eq!(rec.record(fwd(A, B)).unwrap().request, Some((Some(A), B)));
        assert_eq!(rec.record(back(B, A)).unwrap().request, None);
        assert_eq!(rec.record(fwd(A, B)).unwrap().request, None);
    }

    #[test]
    fn entropy_of_user_visits() {
        let mut t = TrafficTally::new();
        t.record_start(U, A, A);
        assert_eq!(t.user_entropy(U).unwrap(), 0.0);

        let mut t = TrafficTally::new();
        for p in 0..4 {
            t.record_start(U, NodeId(p), NodeId(p));
        }
        assert!((t.user_entropy(U).unwrap() - 2.0).abs() < 1e-12);

        let mut t = TrafficTally::new();
        for _ in 0..3 {
            t.record_start(U, A, A);
        }
        t.record_start(U, B, B);
        let expected = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert!((t.user_entropy(U).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.8113).abs() < 1e-4);

        assert!(matches!(t.user_entropy(UserId(9)), Err(Error::Lookup(_))));
    }

    #[test]
    fn merge_adds_keywise() {
        let (a, _) = play(&[jump(A), fwd(A, B)]);
        let (b, _) = play(&[jump(B), fwd(B, A), fwd(A, C)]);
        let mut m = a.tally().clone();
        m.merge(b.tally().clone());
        assert_eq!(m.page_visits[&A], 2);
        assert_eq!(m.page_visits[&B], 2);
        assert_eq!(m.total_sessions(), 2);
        assert_eq!(m.per_user_visits[&U][&A], 2);
    }
}
