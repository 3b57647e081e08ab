//! Exact tests of the counting condition `f(T) >= |T|` for all nonempty `T`
//! inside a column set, via flows instead of subset enumeration.
//!
//! For nonempty `T` every view present in `T` has `g(T_v) >= r_v + 1`, so the
//! positive parts in the bound only vanish for absent views and
//!
//! ```text
//! f(T) = r1' g(T1) + r2' g(T2) + r' g(T) - [T1 != 0] r1 r1' - [T2 != 0] r2 r2' - r'^2.
//! ```
//!
//! The first three terms are the capacity of the row slots `T` reaches in a
//! [`FlowNet`]; the constant depends only on which views `T` meets. Forcing one
//! view-1 column (or one view-2 column, or one of each) to carry the matching
//! constant as extra demand turns each case into a single max-flow problem.

use super::flow::{FlowNet, SlotGroup};
use crate::constraint::ConstraintMatrix;
use crate::ranks::{RankTriple, View};

/// Flow-based tester bound to one constraint matrix and one inequality family.
#[derive(Debug, Clone)]
pub(crate) struct HallTester<'a> {
    cm: &'a ConstraintMatrix,
    groups: Vec<SlotGroup>,
    /// Extra demand when a column of the given view is forced alone.
    single: [i64; 2],
    /// Extra demands `(view-1, view-2)` when one column of each view is forced.
    pair: Option<(i64, i64)>,
}

fn view_slot(view: View) -> usize {
    match view {
        View::First => 0,
        View::Second => 1,
    }
}

impl<'a> HallTester<'a> {
    /// Tester for the joint condition of finite completability.
    pub fn joint(cm: &'a ConstraintMatrix, ranks: RankTriple) -> Self {
        let d = ranks.derived();
        let w = |x: usize| x as i64;
        let (r1, r2) = (w(ranks.r1()), w(ranks.r2()));
        let (r1p, r2p, rp) = (w(d.r1p), w(d.r2p), w(d.rp));
        let groups = vec![
            SlotGroup { capacity: r1p, first: true, second: false },
            SlotGroup { capacity: rp, first: true, second: true },
            SlotGroup { capacity: r2p, first: false, second: true },
        ];
        let ca = r1 * r1p + rp * rp;
        let cb = r2 * r2p + rp * rp;
        HallTester {
            cm,
            groups,
            single: [ca, cb],
            pair: Some((ca, r2 * r2p)),
        }
    }

    /// Tester for `g(T) - r_v >= |T|` within one view.
    pub fn single_view(cm: &'a ConstraintMatrix, rv: usize, view: View) -> Self {
        let rv = rv as i64;
        let group = SlotGroup {
            capacity: 1,
            first: view == View::First,
            second: view == View::Second,
        };
        let mut single = [0; 2];
        single[view_slot(view)] = rv;
        HallTester {
            cm,
            groups: vec![group],
            single,
            pair: None,
        }
    }

    fn base(&self, members: &[usize]) -> FlowNet {
        let mut net = FlowNet::new(self.cm, members, &self.groups);
        net.maximize();
        net
    }

    fn view(&self, col: usize) -> View {
        self.cm.column(col).view
    }

    /// Runs `check` with `col` carrying its single-view extra demand.
    fn forced_single(&self, base: &FlowNet, col: usize) -> Option<FlowNet> {
        let mut net = base.clone();
        let local = net.local_of(col)?;
        net.raise_demand(local, self.single[view_slot(self.view(col))]);
        net.maximize();
        Some(net)
    }

    fn forced_pair(&self, base: &FlowNet, first: usize, second: usize) -> Option<FlowNet> {
        let (ea, eb) = self.pair?;
        let mut net = base.clone();
        let la = net.local_of(first)?;
        let lb = net.local_of(second)?;
        net.raise_demand(la, ea);
        net.raise_demand(lb, eb);
        net.maximize();
        Some(net)
    }

    /// `None` when every nonempty subset of `members` satisfies the
    /// inequality; otherwise a violating subset.
    pub fn violation(&self, members: &[usize]) -> Option<Vec<usize>> {
        let base = self.base(members);
        if !base.saturated() {
            return Some(base.source_side());
        }
        let (firsts, seconds): (Vec<usize>, Vec<usize>) =
            members.iter().partition(|&&c| self.view(c) == View::First);
        for &c in members {
            let net = self.forced_single(&base, c).expect("member column");
            if !net.saturated() {
                return Some(net.source_side());
            }
        }
        if self.pair.is_some() {
            for &a in &firsts {
                for &b in &seconds {
                    let net = self.forced_pair(&base, a, b).expect("member columns");
                    if !net.saturated() {
                        return Some(net.source_side());
                    }
                }
            }
        }
        None
    }

    /// Whether `set + col` still satisfies the inequality, given that `set`
    /// does. Only subsets containing `col` need checking.
    pub fn can_extend(&self, set: &[usize], col: usize) -> bool {
        let mut members = Vec::with_capacity(set.len() + 1);
        members.extend_from_slice(set);
        members.push(col);
        let base = self.base(&members);
        if !base.saturated() {
            return false;
        }
        match self.forced_single(&base, col) {
            Some(net) if net.saturated() => {}
            _ => return false,
        }
        if self.pair.is_none() {
            return true;
        }
        let view = self.view(col);
        for &other in set {
            if self.view(other) == view {
                continue;
            }
            let (a, b) = match view {
                View::First => (col, other),
                View::Second => (other, col),
            };
            match self.forced_pair(&base, a, b) {
                Some(net) if net.saturated() => {}
                _ => return false,
            }
        }
        true
    }

    /// Candidate minimizers of `f(T) - |T|` over nonempty `T` inside
    /// `members`: one set per forcing pattern. A column forced alone is
    /// searched within its own view, so the extra demand of every returned set
    /// is exactly the one its forced columns carry; the overall minimum slack
    /// is therefore attained by one of the returned sets.
    pub fn tight_sets(&self, members: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let (firsts, seconds): (Vec<usize>, Vec<usize>) =
            members.iter().partition(|&&c| self.view(c) == View::First);
        let run = |base: &FlowNet, forced: &[usize], out: &mut Vec<Vec<usize>>| {
            let mut net = base.clone();
            for &c in forced {
                let l = net.local_of(c).expect("forced column is a member");
                net.force(l);
            }
            net.maximize();
            out.push(net.source_side());
        };
        for part in [&firsts, &seconds] {
            if part.is_empty() {
                continue;
            }
            let base = self.base(part);
            for &c in part.iter() {
                run(&base, &[c], &mut out);
            }
        }
        if self.pair.is_some() && !firsts.is_empty() && !seconds.is_empty() {
            let base = self.base(members);
            for &a in &firsts {
                for &b in &seconds {
                    run(&base, &[a, b], &mut out);
                }
            }
        }
        out
    }
}
