//! Logical sessions from HTTP request logs.
//!
//! A request with an empty referrer opens a new session tree. Any other
//! request joins the user's live session in which its referrer URL was most
//! recently requested, as a child of the referrer. A session is live while it
//! has received a request within the timeout.

use std::io::BufRead;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::session::{close_session, SessionDescriptor, SessionTree, TrafficTally, UserId};

pub const DEFAULT_TIMEOUT_SECS: u64 = 1800;

/// Marker for an empty referrer field.
pub const EMPTY_REFERRER: &str = "-";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogRecord {
    pub timestamp: u64,
    pub user: String,
    pub referrer: Option<String>,
    pub target: String,
}

impl LogRecord {
    /// The TSV line for this record, without the trailing newline.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.timestamp,
            self.user,
            self.referrer.as_deref().unwrap_or(EMPTY_REFERRER),
            self.target
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Drop `?query` and `#fragment` from URLs.
    pub strip_query: bool,
    /// Keep only targets whose last path segment has one of these
    /// extensions (or none at all). `None` keeps everything.
    pub extensions: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub lines: u64,
    pub records: u64,
    pub malformed: u64,
    pub filtered: u64,
}

/// Parses one TSV line. `Ok(None)` means the record was filtered out.
pub fn parse_line(line: &str, opts: &ParseOptions) -> std::result::Result<Option<LogRecord>, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 tab-separated fields, got {}", fields.len()));
    }
    let timestamp: u64 = fields[0]
        .parse()
        .map_err(|_| format!("bad timestamp {:?}", fields[0]))?;
    let user = fields[1];
    if user.is_empty() {
        return Err("empty user id".into());
    }
    let clean = |url: &str| -> String {
        if opts.strip_query {
            strip_query(url).to_string()
        } else {
            url.to_string()
        }
    };
    let target = clean(fields[3]);
    if target.is_empty() {
        return Err("empty target".into());
    }
    let referrer = match fields[2] {
        "" | EMPTY_REFERRER => None,
        r => Some(clean(r)),
    };
    if let Some(exts) = &opts.extensions {
        if !has_page_extension(&target, exts) {
            return Ok(None);
        }
    }
    Ok(Some(LogRecord {
        timestamp,
        user: user.to_string(),
        referrer,
        target,
    }))
}

pub fn strip_query(url: &str) -> &str {
    match url.find(['?', '#']) {
        Some(i) => &url[..i],
        None => url,
    }
}

fn has_page_extension(url: &str, exts: &[String]) -> bool {
    let path = strip_query(url);
    let path = path
        .split_once("://")
        .map_or(path, |(_, rest)| rest.find('/').map_or("", |i| &rest[i..]));
    let last = path.rsplit('/').next().unwrap_or("");
    match last.rsplit_once('.') {
        None => true,
        Some((_, ext)) => exts.iter().any(|e| e.eq_ignore_ascii_case(ext)),
    }
}

/// Reads a whole log. Malformed lines are skipped and counted.
pub fn parse_log<R: BufRead>(reader: R, opts: &ParseOptions) -> Result<(Vec<LogRecord>, ParseStats)> {
    let mut stats = ParseStats::default();
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("log line {}", i + 1), e))?;
        stats.lines += 1;
        match parse_line(&line, opts) {
            Ok(Some(r)) => {
                stats.records += 1;
                records.push(r);
            }
            Ok(None) => stats.filtered += 1,
            Err(_) => stats.malformed += 1,
        }
    }
    Ok((records, stats))
}

/// String to dense id.
#[derive(Clone, Debug, Default)]
pub struct Interner {
    ids: FxHashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    pub fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(s.to_string(), id);
        self.names.push(s.to_string());
        id
    }

    pub fn get(&self, s: &str) -> Option<u32> {
        self.ids.get(s).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn host_of(url: &str) -> &str {
    match url.split_once("://") {
        Some((_, rest)) => rest.split(['/', '?', '#']).next().unwrap_or(rest),
        None => url.split('/').next().unwrap_or(url),
    }
}

#[derive(Debug)]
struct LiveSession {
    index: u64,
    tree: SessionTree,
    last_activity: u64,
    /// Last request time of each URL in this session.
    recency: FxHashMap<NodeId, u64>,
}

#[derive(Debug, Default)]
struct UserState {
    live: Vec<LiveSession>,
    next_index: u64,
}

/// Streaming session reconstruction over interleaved users.
#[derive(Debug)]
pub struct Sessionizer {
    timeout: u64,
    entropy_by_host: bool,
    urls: Interner,
    hosts: Interner,
    users: Interner,
    states: Vec<UserState>,
    tally: TrafficTally,
    closed: Vec<SessionDescriptor>,
    records: u64,
}

impl Sessionizer {
    pub fn new(timeout: u64) -> Self {
        Sessionizer {
            timeout,
            entropy_by_host: false,
            urls: Interner::default(),
            hosts: Interner::default(),
            users: Interner::default(),
            states: Vec::new(),
            tally: TrafficTally::new(),
            closed: Vec::new(),
            records: 0,
        }
    }

    /// Aggregate per-user visit vectors by host instead of by URL.
    pub fn entropy_by_host(mut self, on: bool) -> Self {
        self.entropy_by_host = on;
        self
    }

    pub fn urls(&self) -> &Interner {
        &self.urls
    }

    pub fn users(&self) -> &Interner {
        &self.users
    }

    pub fn tally(&self) -> &TrafficTally {
        &self.tally
    }

    pub fn records(&self) -> u64 {
        self.records
    }

    /// Sessions currently open across all users.
    pub fn live_sessions(&self) -> usize {
        self.states.iter().map(|s| s.live.len()).sum()
    }

    pub fn push(&mut self, rec: &LogRecord) {
        self.records += 1;
        let user = UserId(self.users.intern(&rec.user));
        if user.0 as usize == self.states.len() {
            self.states.push(UserState::default());
        }
        let target = NodeId(self.urls.intern(&rec.target));
        let visit_key = if self.entropy_by_host {
            NodeId(self.hosts.intern(host_of(&rec.target)))
        } else {
            target
        };
        let now = rec.timestamp;
        let timeout = self.timeout;

        let state = &mut self.states[user.0 as usize];
        let mut i = 0;
        while i < state.live.len() {
            if now > state.live[i].last_activity.saturating_add(timeout) {
                let s = state.live.remove(i);
                self.closed.push(close_session(&s.tree, user, s.index));
            } else {
                i += 1;
            }
        }

        let referrer = rec.referrer.as_deref().and_then(|r| self.urls.get(r)).map(NodeId);
        // most recent request of the referrer wins; ties go to the newer session
        let host = referrer.and_then(|r| {
            state
                .live
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.recency.get(&r).map(|&t| ((t, s.index), i)))
                .max()
                .map(|(_, i)| i)
        });

        match (referrer, host) {
            (Some(r), Some(i)) => {
                let s = &mut state.live[i];
                s.tree.add_click();
                if s.tree.attach(r, target) {
                    self.tally.record_link(user, r, target, visit_key);
                }
                s.recency.insert(target, now);
                s.last_activity = s.last_activity.max(now);
            }
            _ => {
                let mut recency = FxHashMap::default();
                recency.insert(target, now);
                state.live.push(LiveSession {
                    index: state.next_index,
                    tree: SessionTree::new(target),
                    last_activity: now,
                    recency,
                });
                state.next_index += 1;
                self.tally.record_start(user, target, visit_key);
            }
        }
    }

    /// Descriptors of sessions closed so far, in closing order.
    pub fn drain_closed(&mut self) -> Vec<SessionDescriptor> {
        std::mem::take(&mut self.closed)
    }

    /// Closes every remaining session and returns all undrained descriptors
    /// sorted by user name (numeric names in numeric order) and session
    /// index, plus the final tally.
    pub fn finish(mut self) -> SessionizeOutput {
        for (u, state) in self.states.iter_mut().enumerate() {
            for s in state.live.drain(..) {
                self.closed
                    .push(close_session(&s.tree, UserId(u as u32), s.index));
            }
        }
        let users = &self.users;
        self.closed.sort_by(|a, b| {
            user_order_key(users.name(a.user.0))
                .cmp(&user_order_key(users.name(b.user.0)))
                .then(a.index.cmp(&b.index))
        });
        SessionizeOutput {
            sessions: self.closed,
            tally: self.tally,
            urls: self.urls,
            users: self.users,
        }
    }
}

/// Numeric user ids sort numerically and before any other id.
pub fn user_order_key(name: &str) -> (u8, u64, &str) {
    match name.parse::<u64>() {
        Ok(n) => (0, n, name),
        Err(_) => (1, 0, name),
    }
}

#[derive(Debug)]
pub struct SessionizeOutput {
    pub sessions: Vec<SessionDescriptor>,
    pub tally: TrafficTally,
    pub urls: Interner,
    pub users: Interner,
}

/// Reconstructs sessions for a batch of records.
pub fn sessionize<'a, I>(records: I, timeout: u64) -> SessionizeOutput
where
    I: IntoIterator<Item = &'a LogRecord>,
{
    let mut s = Sessionizer::new(timeout);
    for r in records {
        s.push(r);
    }
    s.finish()
}
