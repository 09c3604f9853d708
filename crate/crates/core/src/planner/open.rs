use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::node::SearchNode;

#[derive(Debug, Clone, Copy)]
struct Key {
    coverage: f64,
    ap_len: f64,
    seq: u64,
    id: usize,
}

impl Ord for Key {
    // first = highest PAP coverage, then shortest AP, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .coverage
            .total_cmp(&self.coverage)
            .then(self.ap_len.total_cmp(&other.ap_len))
            .then(self.seq.cmp(&other.seq))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

/// Priority queue of open nodes with per-vertex access in insertion order.
#[derive(Debug)]
pub(crate) struct OpenList {
    slots: Vec<Option<(SearchNode, Key)>>,
    free: Vec<usize>,
    order: BTreeSet<Key>,
    by_vertex: Vec<Vec<usize>>,
    next_seq: u64,
}

impl OpenList {
    pub fn new(n_vertices: usize) -> Self {
        Self {
            slots: Vec::new(),
            free: Vec::new(),
            order: BTreeSet::new(),
            by_vertex: vec![Vec::new(); n_vertices],
            next_seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn insert(&mut self, node: SearchNode) -> usize {
        let id = self.free.pop().unwrap_or(self.slots.len());
        let key = Key {
            coverage: node.pap_ipv.coverage(),
            ap_len: node.ap_len,
            seq: self.next_seq,
            id,
        };
        self.next_seq += 1;
        self.by_vertex[node.vertex].push(id);
        self.order.insert(key);
        if id == self.slots.len() {
            self.slots.push(Some((node, key)));
        } else {
            self.slots[id] = Some((node, key));
        }
        id
    }

    pub fn pop_best(&mut self) -> Option<SearchNode> {
        let key = self.order.pop_first()?;
        Some(self.take(key.id))
    }

    fn take(&mut self, id: usize) -> SearchNode {
        let (node, _) = self.slots[id].take().expect("live open slot");
        self.by_vertex[node.vertex].retain(|&x| x != id);
        self.free.push(id);
        node
    }

    pub fn remove(&mut self, id: usize) -> SearchNode {
        let key = self.slots[id].as_ref().expect("live open slot").1;
        self.order.remove(&key);
        self.take(id)
    }

    /// Ids of open nodes at `v`, oldest first.
    pub fn at_vertex(&self, v: usize) -> Vec<usize> {
        self.by_vertex[v].clone()
    }

    pub fn get(&self, id: usize) -> &SearchNode {
        &self.slots[id].as_ref().expect("live open slot").0
    }

    /// Replaces a node in place; it keeps its insertion rank.
    pub fn replace(&mut self, id: usize, node: SearchNode) {
        let slot = self.slots[id].as_mut().expect("live open slot");
        debug_assert_eq!(slot.0.vertex, node.vertex);
        self.order.remove(&slot.1);
        slot.1.coverage = node.pap_ipv.coverage();
        slot.1.ap_len = node.ap_len;
        slot.0 = node;
        self.order.insert(slot.1);
    }
}
