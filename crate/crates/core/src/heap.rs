//! Leftist max-heap with O(log n) meld.

type Link<K> = Option<Box<Node<K>>>;

#[derive(Debug, Clone)]
struct Node<K> {
    key: K,
    rank: u32, // length of the right spine
    left: Link<K>,
    right: Link<K>,
}

#[derive(Debug, Clone)]
pub struct LeftistHeap<K> {
    root: Link<K>,
    len: usize,
}

impl<K> Default for LeftistHeap<K> {
    fn default() -> Self {
        Self { root: None, len: 0 }
    }
}

fn rank<K>(link: &Link<K>) -> u32 {
    link.as_ref().map_or(0, |n| n.rank)
}

fn merge<K: Ord>(a: Link<K>, b: Link<K>) -> Link<K> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(mut a), Some(mut b)) => {
            if a.key < b.key {
                std::mem::swap(&mut a, &mut b);
            }
            let right = a.right.take();
            a.right = merge(right, Some(b));
            if rank(&a.left) < rank(&a.right) {
                std::mem::swap(&mut a.left, &mut a.right);
            }
            a.rank = rank(&a.right) + 1;
            Some(a)
        }
    }
}

impl<K: Ord> LeftistHeap<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, key: K) {
        let node = Box::new(Node {
            key,
            rank: 1,
            left: None,
            right: None,
        });
        self.root = merge(self.root.take(), Some(node));
        self.len += 1;
    }

    pub fn peek(&self) -> Option<&K> {
        self.root.as_ref().map(|n| &n.key)
    }

    pub fn pop(&mut self) -> Option<K> {
        let root = self.root.take()?;
        let Node { key, left, right, .. } = *root;
        self.root = merge(left, right);
        self.len -= 1;
        Some(key)
    }

    /// Moves every element of `other` into `self`.
    pub fn meld(&mut self, mut other: LeftistHeap<K>) {
        self.root = merge(self.root.take(), other.root.take());
        self.len += other.len;
    }
}

impl<K> Drop for LeftistHeap<K> {
    fn drop(&mut self) {
        // iterative teardown; a degenerate heap can be deep
        let mut stack: Vec<Box<Node<K>>> = self.root.take().into_iter().collect();
        while let Some(mut node) = stack.pop() {
            stack.extend(node.left.take());
            stack.extend(node.right.take());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pops_in_descending_order() {
        let mut h = LeftistHeap::new();
        for k in [5, 1, 9, 3, 7] {
            h.push(k);
        }
        let mut other = LeftistHeap::new();
        other.push(8);
        other.push(2);
        h.meld(other);
        assert_eq!(h.len(), 7);
        assert_eq!(h.peek(), Some(&9));
        let out: Vec<i32> = std::iter::from_fn(|| h.pop()).collect();
        assert_eq!(out, vec![9, 8, 7, 5, 3, 2, 1]);
        assert!(h.is_empty());
    }

    proptest! {
        #[test]
        fn melded_heaps_sort(a in prop::collection::vec(any::<i32>(), 0..60),
                             b in prop::collection::vec(any::<i32>(), 0..60)) {
            let mut ha = LeftistHeap::new();
            a.iter().for_each(|&k| ha.push(k));
            let mut hb = LeftistHeap::new();
            b.iter().for_each(|&k| hb.push(k));
            ha.meld(hb);
            let got: Vec<i32> = std::iter::from_fn(|| ha.pop()).collect();
            let mut want: Vec<i32> = a.iter().chain(&b).copied().collect();
            want.sort_by(|x, y| y.cmp(x));
            prop_assert_eq!(got, want);
        }
    }
}
