use std::collections::BTreeSet;

/// Id-addressed storage. New elements take the smallest free id, and the
/// layout depends only on the set of live ids, so removing and re-inserting
/// an element restores the storage exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Slab<T> {
    slots: Vec<Option<T>>,
    free: BTreeSet<u32>,
    len: usize,
}

impl<T> Default for Slab<T> {
    fn default() -> Self {
        Slab {
            slots: Vec::new(),
            free: BTreeSet::new(),
            len: 0,
        }
    }
}

impl<T> Slab<T> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, id: u32) -> Option<&T> {
        self.slots.get(id as usize).and_then(|s| s.as_ref())
    }

    pub fn get_mut(&mut self, id: u32) -> Option<&mut T> {
        self.slots.get_mut(id as usize).and_then(|s| s.as_mut())
    }

    pub fn contains(&self, id: u32) -> bool {
        self.get(id).is_some()
    }

    /// The id the next `insert` will use.
    pub fn next_id(&self) -> u32 {
        self.free.first().copied().unwrap_or(self.slots.len() as u32)
    }

    pub fn insert(&mut self, value: T) -> u32 {
        let id = self.next_id();
        self.insert_at(id, value);
        id
    }

    /// Insert at a specific id. Panics if the id is taken.
    pub fn insert_at(&mut self, id: u32, value: T) {
        let idx = id as usize;
        while self.slots.len() <= idx {
            self.free.insert(self.slots.len() as u32);
            self.slots.push(None);
        }
        assert!(self.slots[idx].is_none(), "slab id {id} already in use");
        self.free.remove(&id);
        self.slots[idx] = Some(value);
        self.len += 1;
    }

    pub fn remove(&mut self, id: u32) -> Option<T> {
        let v = self.slots.get_mut(id as usize)?.take()?;
        self.len -= 1;
        self.free.insert(id);
        while matches!(self.slots.last(), Some(None)) {
            self.slots.pop();
            self.free.remove(&(self.slots.len() as u32));
        }
        Some(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &T)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|v| (i as u32, v)))
    }
}
