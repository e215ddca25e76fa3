//! Persistent cons-list stacks.
//!
//! Logs and tapes are stacks that are pushed and popped once per machine
//! transition while whole states get retained in traces, so structural
//! sharing between consecutive states keeps memory proportional to the
//! live state rather than to the trace length.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

pub struct Stack<T>(Option<Rc<Node<T>>>);

struct Node<T> {
    item: T,
    rest: Stack<T>,
    len: usize,
}

impl<T> Stack<T> {
    pub fn new() -> Self {
        Stack(None)
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |n| n.len)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn push(&self, item: T) -> Self {
        Stack(Some(Rc::new(Node {
            item,
            rest: self.clone(),
            len: self.len() + 1,
        })))
    }

    pub fn head(&self) -> Option<&T> {
        self.0.as_ref().map(|n| &n.item)
    }

    pub fn pop(&self) -> Option<(&T, Stack<T>)> {
        self.0.as_ref().map(|n| (&n.item, n.rest.clone()))
    }

    pub fn iter(&self) -> Iter<'_, T> {
        Iter(self)
    }
}

impl<T: Clone> Stack<T> {
    /// Splits off the `n` topmost items; the remainder keeps its spine.
    pub fn split(&self, n: usize) -> Option<(Vec<T>, Stack<T>)> {
        let mut taken = Vec::with_capacity(n);
        let mut rest = self.clone();
        for _ in 0..n {
            let (head, tail) = rest.pop()?;
            taken.push(head.clone());
            rest = tail;
        }
        Some((taken, rest))
    }

    /// Stacks `self` on top of `below`.
    pub fn concat(&self, below: &Stack<T>) -> Stack<T> {
        let mut out = below.clone();
        let items: Vec<&T> = self.iter().collect();
        for item in items.into_iter().rev() {
            out = out.push(item.clone());
        }
        out
    }

    /// Builds a stack from items listed top-first.
    pub fn from_top_down<I: IntoIterator<Item = T>>(items: I) -> Self
    where
        I::IntoIter: DoubleEndedIterator,
    {
        let mut out = Stack::new();
        for item in items.into_iter().rev() {
            out = out.push(item);
        }
        out
    }
}

pub struct Iter<'a, T>(&'a Stack<T>);

impl<'a, T> Iterator for Iter<'a, T> {
    type Item = &'a T;

    fn next(&mut self) -> Option<&'a T> {
        let node = self.0 .0.as_ref()?;
        self.0 = &node.rest;
        Some(&node.item)
    }
}

impl<T> Clone for Stack<T> {
    fn clone(&self) -> Self {
        Stack(self.0.clone())
    }
}

impl<T> Default for Stack<T> {
    fn default() -> Self {
        Stack::new()
    }
}

impl<T: PartialEq> PartialEq for Stack<T> {
    fn eq(&self, other: &Self) -> bool {
        if let (Some(a), Some(b)) = (&self.0, &other.0) {
            if Rc::ptr_eq(a, b) {
                return true;
            }
        }
        self.len() == other.len() && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }
}

impl<T: Eq> Eq for Stack<T> {}

impl<T: Hash> Hash for Stack<T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_usize(self.len());
        for item in self.iter() {
            item.hash(state);
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Stack<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_pop_shares_spine() {
        let s = Stack::new().push(1).push(2).push(3);
        assert_eq!(s.len(), 3);
        let (h, rest) = s.pop().unwrap();
        assert_eq!(*h, 3);
        assert_eq!(rest.len(), 2);
        assert_eq!(s.iter().copied().collect::<Vec<_>>(), vec![3, 2, 1]);
    }

    #[test]
    fn split_and_concat() {
        let s = Stack::from_top_down(vec![1, 2, 3, 4]);
        let (top, rest) = s.split(2).unwrap();
        assert_eq!(top, vec![1, 2]);
        assert_eq!(rest.iter().copied().collect::<Vec<_>>(), vec![3, 4]);
        let joined = Stack::from_top_down(top).concat(&rest);
        assert_eq!(joined, s);
        assert!(s.split(5).is_none());
    }
}
