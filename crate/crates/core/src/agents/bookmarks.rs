//! Per-agent bookmark memory: pages ranked by how often they were visited.

use rand::Rng;
use rand_distr::{Distribution, Zipf};
use rustc_hash::FxHashMap;

use crate::graph::NodeId;

/// Pages ranked from most to least visited. Equal visit counts keep the
/// page that was first visited earlier in front.
///
/// Internally every page gets a dense slot in first-visit order; `order`
/// holds the slots in rank order so a touch is a binary search plus one
/// rotation of a contiguous range.
#[derive(Clone, Debug, Default)]
pub struct BookmarkList {
    slot_of: FxHashMap<NodeId, u32>,
    pages: Vec<NodeId>,
    visits: Vec<u64>,
    order: Vec<u32>,
}

impl BookmarkList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn visits(&self, page: NodeId) -> Option<u64> {
        self.slot_of.get(&page).map(|&s| self.visits[s as usize])
    }

    /// 1-based rank of `page`.
    pub fn rank_of(&self, page: NodeId) -> Option<usize> {
        let &slot = self.slot_of.get(&page)?;
        Some(self.position(slot) + 1)
    }

    /// Page at 1-based rank `rank`.
    pub fn at_rank(&self, rank: usize) -> Option<NodeId> {
        let slot = *self.order.get(rank.checked_sub(1)?)?;
        Some(self.pages[slot as usize])
    }

    /// `(page, visits)` in rank order.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.order
            .iter()
            .map(|&s| (self.pages[s as usize], self.visits[s as usize]))
    }

    #[inline]
    fn key(&self, slot: u32) -> (std::cmp::Reverse<u64>, u32) {
        (std::cmp::Reverse(self.visits[slot as usize]), slot)
    }

    fn position(&self, slot: u32) -> usize {
        let key = self.key(slot);
        self.order
            .binary_search_by(|&s| self.key(s).cmp(&key))
            .expect("bookmark slot missing from rank order")
    }

    /// Records one visit to `page`, inserting it with one visit if absent.
    pub fn touch(&mut self, page: NodeId) {
        match self.slot_of.get(&page) {
            None => {
                let slot = self.pages.len() as u32;
                self.slot_of.insert(page, slot);
                self.pages.push(page);
                self.visits.push(1);
                // newest page with the lowest possible count ranks last
                self.order.push(slot);
            }
            Some(&slot) => {
                let from = self.position(slot);
                self.visits[slot as usize] += 1;
                let key = self.key(slot);
                let to = self.order[..from].partition_point(|&s| self.key(s) < key);
                self.order[to..=from].rotate_right(1);
            }
        }
    }

    /// Draws a page with probability proportional to `rank^-beta` over the
    /// current list. `None` if the list is empty.
    pub fn sample<R: Rng + ?Sized>(&self, beta: f64, rng: &mut R) -> Option<NodeId> {
        match self.len() {
            0 => None,
            1 => Some(self.pages[self.order[0] as usize]),
            len => {
                let zipf = Zipf::new(len as f64, beta).expect("valid Zipf parameters");
                let rank = zipf.sample(rng) as usize;
                self.at_rank(rank)
            }
        }
    }
}

/// Selection probability of each rank `1..=len` under `rank^-beta`.
pub fn rank_probabilities(len: usize, beta: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=len).map(|r| (r as f64).powf(-beta)).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const A: NodeId = NodeId(10);
    const B: NodeId = NodeId(20);
    const C: NodeId = NodeId(30);

    fn list(visits: &[(NodeId, u64)]) -> BookmarkList {
        let mut l = BookmarkList::new();
        for &(p, _) in visits {
            l.touch(p);
        }
        for &(p, k) in visits {
            for _ in 1..k {
                l.touch(p);
            }
        }
        l
    }

    fn snapshot(l: &BookmarkList) -> Vec<(NodeId, u64)> {
        l.entries().collect()
    }

    #[test]
    fn touch_inserts_new_page() {
        let mut l = BookmarkList::new();
        l.touch(A);
        assert_eq!(snapshot(&l), vec![(A, 1)]);
    }

    #[test]
    fn touch_promotes_past_tied_pages() {
        let mut l = list(&[(A, 2), (B, 2)]);
        assert_eq!(snapshot(&l), vec![(A, 2), (B, 2)]);
        l.touch(B);
        assert_eq!(snapshot(&l), vec![(B, 3), (A, 2)]);
    }

    #[test]
    fn ties_keep_first_visit_order() {
        let mut l = list(&[(A, 2), (B, 1)]);
        l.touch(B);
        assert_eq!(snapshot(&l), vec![(A, 2), (B, 2)]);
        assert_eq!(l.rank_of(A), Some(1));
    }

    #[test]
    fn promoted_page_lands_by_first_visit_time() {
        // C was first seen before D, so after catching up it ranks ahead of D
        let d = NodeId(40);
        let mut l = list(&[(A, 3), (B, 1), (C, 1), (d, 2)]);
        assert_eq!(snapshot(&l), vec![(A, 3), (d, 2), (B, 1), (C, 1)]);
        l.touch(C);
        assert_eq!(snapshot(&l), vec![(A, 3), (C, 2), (d, 2), (B, 1)]);
    }

    #[test]
    fn two_bookmark_probabilities() {
        let p = rank_probabilities(2, 1.33);
        let second = 2f64.powf(-1.33);
        assert!((p[0] - 1.0 / (1.0 + second)).abs() < 1e-15);
        assert!((p[0] - 0.7155).abs() < 1e-4);
        assert!((p[1] - 0.2845).abs() < 1e-4);
    }

    #[test]
    fn three_rank_probabilities() {
        let p = rank_probabilities(3, 1.33);
        let w = [1.0, 2f64.powf(-1.33), 3f64.powf(-1.33)];
        let z: f64 = w.iter().sum();
        for i in 0..3 {
            assert!((p[i] - w[i] / z).abs() < 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_bookmark_is_always_drawn() {
        let l = list(&[(C, 4)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(l.sample(1.33, &mut rng), Some(C));
        }
        assert_eq!(BookmarkList::new().sample(1.33, &mut rng), None);
    }

    #[test]
    fn sampling_matches_rank_law() {
        // 10^6 draws against the exact normalization, 3 sigma per rank
        let l = list(&[(A, 9), (B, 5), (C, 3), (NodeId(1), 2), (NodeId(2), 1)]);
        let beta = 1.33;
        let p = rank_probabilities(l.len(), beta);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000usize;
        let mut counts = vec![0usize; l.len()];
        for _ in 0..draws {
            let page = l.sample(beta, &mut rng).unwrap();
            counts[l.rank_of(page).unwrap() - 1] += 1;
        }
        for (r, (&c, &pr)) in counts.iter().zip(&p).enumerate() {
            let expected = draws as f64 * pr;
            let sigma = (draws as f64 * pr * (1.0 - pr)).sqrt();
            assert!(
                (c as f64 - expected).abs() < 3.0 * sigma,
                "rank {}: {} vs {:.0} ± {:.0}",
                r + 1,
                c,
                expected,
                sigma
            );
        }
    }
}
