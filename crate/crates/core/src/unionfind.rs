use std::collections::BTreeMap;

/// Disjoint sets with union by size and path compression.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "too many vertices for u32 indices");
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Back to all singletons without reallocating.
    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.components = self.parent.len();
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        // path halving
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Root lookup without compression, for shared borrows.
    pub fn root(&self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            x = self.parent[x] as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`. Returns the sizes of the two merged
    /// sets when they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return None;
        }
        let (sa, sb) = (self.size[ra] as usize, self.size[rb] as usize);
        if sa < sb {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        Some((sa, sb))
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Sizes of the two largest sets (second is 0 when there is one set).
    pub fn top_two(&self) -> (usize, usize) {
        let mut first = 0u32;
        let mut second = 0u32;
        for (i, &p) in self.parent.iter().enumerate() {
            if p as usize == i {
                let s = self.size[i];
                if s > first {
                    second = first;
                    first = s;
                } else if s > second {
                    second = s;
                }
            }
        }
        (first as usize, second as usize)
    }
}

/// Multiset of component sizes, kept in step with a union-find during edge
/// insertion so that the largest and second largest sizes are exact after
/// every step.
#[derive(Debug, Clone)]
pub struct SizeMultiset {
    counts: BTreeMap<usize, usize>,
}

impl SizeMultiset {
    /// `n` singletons.
    pub fn singletons(n: usize) -> Self {
        let mut counts = BTreeMap::new();
        if n > 0 {
            counts.insert(1, n);
        }
        SizeMultiset { counts }
    }

    fn remove(&mut self, s: usize) {
        let c = self.counts.get_mut(&s).expect("size present");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(&s);
        }
    }

    pub fn merge(&mut self, a: usize, b: usize) {
        self.remove(a);
        self.remove(b);
        *self.counts.entry(a + b).or_insert(0) += 1;
    }

    pub fn largest(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn second(&self) -> usize {
        let mut it = self.counts.iter().rev();
        match it.next() {
            None => 0,
            Some((&s, &c)) if c >= 2 => s,
            Some(_) => it.next().map(|(&s, _)| s).unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn union_tracks_sizes() {
        let mut uf = UnionFind::new(5);
        assert_eq!(uf.union(0, 1), Some((1, 1)));
        assert_eq!(uf.union(1, 0), None);
        assert_eq!(uf.union(2, 1), Some((1, 2)));
        assert_eq!(uf.set_size(0), 3);
        assert_eq!(uf.top_two(), (3, 1));
        assert_eq!(uf.components(), 3);
        uf.reset();
        assert_eq!(uf.top_two(), (1, 1));
    }

    proptest! {
        #[test]
        fn multiset_agrees_with_scan(n in 2usize..40, pairs in proptest::collection::vec((0usize..40, 0usize..40), 0..80)) {
            let mut uf = UnionFind::new(n);
            let mut ms = SizeMultiset::singletons(n);
            for (a, b) in pairs {
                let (a, b) = (a % n, b % n);
                if let Some((sa, sb)) = uf.union(a, b) {
                    ms.merge(sa, sb);
                }
                prop_assert_eq!((ms.largest(), ms.second()), uf.top_two());
            }
        }
    }
}
