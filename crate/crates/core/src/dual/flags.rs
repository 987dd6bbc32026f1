use serde::{Deserialize, Serialize};

use crate::marks::MarkKind;
use crate::model::Side;

/// Labeled set of unknown sites: at most one flag per site, unique labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlagSet {
    n: usize,
    /// Label at each site (index = site), 0 when unflagged.
    by_site: Vec<u32>,
    /// `(label, site)` of every live flag, unordered.
    flags: Vec<(u32, usize)>,
    next_label: u32,
}

/// What a mark did to the flag set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlagEvent {
    None,
    /// A flag changed site (stirring or copy).
    Moved,
    /// Both ends of a bond were flagged; labels switched.
    Swapped,
    /// `±` mark on a flagged outer site.
    Death { label: u32, plus: bool, side: Side },
    /// Branch mark on a flagged inner site. `partner` labels the outer
    /// flag, freshly created when `created`.
    Branch { label: u32, partner: u32, created: bool, side: Side },
    /// Copy mark with both boundary sites flagged: the inner flag is
    /// absorbed into the outer one.
    CopyMerge { removed: u32, survivor: u32, side: Side },
}

impl FlagEvent {
    /// Whether the event changes the number of flags.
    pub fn is_boundary(&self) -> bool {
        matches!(
            self,
            FlagEvent::Death { .. } | FlagEvent::Branch { created: true, .. } | FlagEvent::CopyMerge { .. }
        )
    }
}

impl FlagSet {
    pub fn new(n: usize) -> Self {
        FlagSet {
            n,
            by_site: vec![0; n + 1],
            flags: Vec::new(),
            next_label: 1,
        }
    }

    /// Flags at `sites`, labeled `1, 2, …` in the given order.
    pub fn from_sites(n: usize, sites: &[usize]) -> Self {
        let mut set = FlagSet::new(n);
        for &s in sites {
            assert!((1..n).contains(&s), "site {s} outside lattice");
            assert!(set.by_site[s] == 0, "duplicate flag at site {s}");
            set.insert(s);
        }
        set
    }

    pub fn singleton(n: usize, x: usize) -> Self {
        Self::from_sites(n, &[x])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn next_label(&self) -> u32 {
        self.next_label
    }

    #[inline]
    pub fn label_at(&self, site: usize) -> Option<u32> {
        match self.by_site[site] {
            0 => None,
            l => Some(l),
        }
    }

    #[inline]
    pub fn contains(&self, site: usize) -> bool {
        self.by_site[site] != 0
    }

    pub fn position(&self, label: u32) -> Option<usize> {
        self.flags.iter().find(|f| f.0 == label).map(|f| f.1)
    }

    /// `(label, site)` pairs, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.flags.iter().copied()
    }

    /// Flags sorted by site.
    pub fn sorted(&self) -> Vec<(u32, usize)> {
        let mut v = self.flags.clone();
        v.sort_by_key(|f| f.1);
        v
    }

    pub fn sites(&self) -> Vec<usize> {
        self.sorted().into_iter().map(|f| f.1).collect()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.flags.iter().map(|f| f.1).max()
    }

    fn insert(&mut self, site: usize) -> u32 {
        let label = self.next_label;
        self.next_label += 1;
        self.by_site[site] = label;
        self.flags.push((label, site));
        label
    }

    fn remove_at(&mut self, site: usize) -> u32 {
        let label = self.by_site[site];
        self.by_site[site] = 0;
        let i = self.flags.iter().position(|f| f.0 == label).unwrap();
        self.flags.swap_remove(i);
        label
    }

    fn move_flag(&mut self, from: usize, to: usize) {
        let label = self.by_site[from];
        self.by_site[from] = 0;
        self.by_site[to] = label;
        if let Some(f) = self.flags.iter_mut().find(|f| f.0 == label) {
            f.1 = to;
        }
    }

    fn swap_sites(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.by_site[a], self.by_site[b]);
        self.by_site[a] = lb;
        self.by_site[b] = la;
        for f in self.flags.iter_mut() {
            if f.0 == la {
                f.1 = b;
            } else if f.0 == lb {
                f.1 = a;
            }
        }
    }

    fn sides(&self, side: Side) -> (usize, usize) {
        match side {
            Side::Left => (1, 2),
            Side::Right => (self.n - 1, self.n - 2),
        }
    }

    fn exchange(&mut self, x: usize) -> FlagEvent {
        match (self.contains(x), self.contains(x + 1)) {
            (true, true) => {
                self.swap_sites(x, x + 1);
                FlagEvent::Swapped
            }
            (true, false) => {
                self.move_flag(x, x + 1);
                FlagEvent::Moved
            }
            (false, true) => {
                self.move_flag(x + 1, x);
                FlagEvent::Moved
            }
            (false, false) => FlagEvent::None,
        }
    }

    /// Apply a mark under the branching generator (motion, deaths at the
    /// outer sites, branching at the inner sites).
    pub fn apply(&mut self, kind: MarkKind) -> FlagEvent {
        match kind {
            MarkKind::Exchange(x) => self.exchange(x),
            MarkKind::Plus(side) | MarkKind::Minus(side) => {
                let (outer, _) = self.sides(side);
                if self.contains(outer) {
                    let label = self.remove_at(outer);
                    FlagEvent::Death {
                        label,
                        plus: matches!(kind, MarkKind::Plus(_)),
                        side,
                    }
                } else {
                    FlagEvent::None
                }
            }
            MarkKind::Copy(side) => {
                let (outer, inner) = self.sides(side);
                if !self.contains(inner) {
                    FlagEvent::None
                } else if !self.contains(outer) {
                    self.move_flag(inner, outer);
                    FlagEvent::Moved
                } else {
                    let survivor = self.by_site[outer];
                    let removed = self.remove_at(inner);
                    FlagEvent::CopyMerge { removed, survivor, side }
                }
            }
            MarkKind::Branch(side) => {
                let (outer, inner) = self.sides(side);
                let Some(label) = self.label_at(inner) else {
                    return FlagEvent::None;
                };
                match self.label_at(outer) {
                    Some(partner) => FlagEvent::Branch {
                        label,
                        partner,
                        created: false,
                        side,
                    },
                    None => FlagEvent::Branch {
                        label,
                        partner: self.insert(outer),
                        created: true,
                        side,
                    },
                }
            }
        }
    }

    /// Apply a mark under the flag-conserving motion generator: `±` and
    /// branch marks do nothing, and a copy mark with both boundary sites
    /// flagged switches the two flags.
    pub fn apply_frozen(&mut self, kind: MarkKind) -> FlagEvent {
        match kind {
            MarkKind::Exchange(x) => self.exchange(x),
            MarkKind::Copy(side) => {
                let (outer, inner) = self.sides(side);
                match (self.contains(outer), self.contains(inner)) {
                    (_, false) => FlagEvent::None,
                    (false, true) => {
                        self.move_flag(inner, outer);
                        FlagEvent::Moved
                    }
                    (true, true) => {
                        self.swap_sites(outer, inner);
                        FlagEvent::Swapped
                    }
                }
            }
            _ => FlagEvent::None,
        }
    }

    /// Whether `kind` can change this set (or its labels).
    #[inline]
    pub fn is_affected_by(&self, kind: MarkKind) -> bool {
        match kind {
            MarkKind::Exchange(x) => self.contains(x) || self.contains(x + 1),
            MarkKind::Plus(s) | MarkKind::Minus(s) => self.contains(self.sides(s).0),
            MarkKind::Copy(s) | MarkKind::Branch(s) => self.contains(self.sides(s).1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn motion_and_swaps() {
        let mut a = FlagSet::from_sites(10, &[3, 4]);
        assert_eq!(a.apply(MarkKind::Exchange(3)), FlagEvent::Swapped);
        assert_eq!(a.label_at(3), Some(2));
        assert_eq!(a.label_at(4), Some(1));
        assert_eq!(a.apply(MarkKind::Exchange(4)), FlagEvent::Moved);
        assert_eq!(a.position(1), Some(5));
        assert_eq!(a.apply(MarkKind::Exchange(7)), FlagEvent::None);
    }

    #[test]
    fn death_branch_copy() {
        let mut a = FlagSet::from_sites(10, &[2]);
        assert_eq!(
            a.apply(MarkKind::Branch(Side::Left)),
            FlagEvent::Branch { label: 1, partner: 2, created: true, side: Side::Left }
        );
        assert_eq!(
            a.apply(MarkKind::Branch(Side::Left)),
            FlagEvent::Branch { label: 1, partner: 2, created: false, side: Side::Left }
        );
        assert_eq!(a.len(), 2);
        assert_eq!(
            a.apply(MarkKind::Copy(Side::Left)),
            FlagEvent::CopyMerge { removed: 1, survivor: 2, side: Side::Left }
        );
        assert_eq!(a.sites(), vec![1]);
        assert_eq!(
            a.apply(MarkKind::Minus(Side::Left)),
            FlagEvent::Death { label: 2, plus: false, side: Side::Left }
        );
        assert!(a.is_empty());
        assert_eq!(a.next_label(), 3);
    }

    #[test]
    fn right_side_mirrors() {
        let mut a = FlagSet::from_sites(10, &[8]);
        assert_eq!(a.apply(MarkKind::Copy(Side::Right)), FlagEvent::Moved);
        assert_eq!(a.sites(), vec![9]);
        assert!(matches!(a.apply(MarkKind::Plus(Side::Right)), FlagEvent::Death { plus: true, .. }));
    }

    #[test]
    fn frozen_copy_switches() {
        let mut a = FlagSet::from_sites(10, &[1, 2]);
        assert_eq!(a.apply_frozen(MarkKind::Copy(Side::Left)), FlagEvent::Swapped);
        assert_eq!(a.label_at(1), Some(2));
        assert_eq!(a.apply_frozen(MarkKind::Plus(Side::Left)), FlagEvent::None);
        assert_eq!(a.apply_frozen(MarkKind::Branch(Side::Left)), FlagEvent::None);
        assert_eq!(a.len(), 2);
    }
}
