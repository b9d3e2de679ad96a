/// Open-addressing table from lattice coordinates to dense ids.
///
/// Only the first `d` of the `d + 1` coordinates are stored; the last one is
/// fixed by the zero-sum constraint. Ids follow insertion order. Each slot
/// holds its key next to the id so a probe touches one place in memory.
pub(crate) struct LatticeHash {
    key_len: usize,
    /// Keys by id.
    keys: Vec<i32>,
    /// `key_len + 1` words per slot: the key, then the id (`EMPTY` if free).
    slots: Vec<i32>,
    capacity: usize,
    /// `64 - log2(capacity)`: slots are the top bits of the hash.
    shift: u32,
}

const EMPTY: i32 = -1;

impl LatticeHash {
    pub fn with_capacity(key_len: usize, expected: usize) -> Self {
        let capacity = (expected.max(8) * 2).next_power_of_two();
        Self {
            key_len,
            keys: Vec::with_capacity(expected * key_len),
            slots: Self::empty_slots(key_len, capacity),
            capacity,
            shift: 64 - capacity.trailing_zeros(),
        }
    }

    fn empty_slots(key_len: usize, capacity: usize) -> Vec<i32> {
        let mut slots = vec![0; capacity * (key_len + 1)];
        for s in slots.chunks_exact_mut(key_len + 1) {
            s[key_len] = EMPTY;
        }
        slots
    }

    pub fn len(&self) -> usize {
        self.keys.len() / self.key_len
    }

    pub fn key(&self, id: usize) -> &[i32] {
        &self.keys[id * self.key_len..(id + 1) * self.key_len]
    }

    fn home(&self, key: &[i32]) -> usize {
        let mut h: u64 = 0;
        for &k in key {
            h = (h.rotate_left(5) ^ k as u32 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
        (h >> self.shift) as usize
    }

    /// Hints the cache to load the home slot of `key`.
    pub fn prefetch(&self, key: &[i32]) {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            let at = self.home(key) * (self.key_len + 1);
            // SAFETY: `at` indexes into `slots`; a prefetch has no other effect.
            unsafe { _mm_prefetch::<_MM_HINT_T0>(self.slots.as_ptr().add(at) as *const i8) }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = key;
    }

    /// Slot holding `key`, or the free slot where it would go.
    fn probe(&self, key: &[i32]) -> usize {
        let w = self.key_len + 1;
        let mut slot = self.home(key);
        loop {
            let s = &self.slots[slot * w..(slot + 1) * w];
            if s[self.key_len] == EMPTY || &s[..self.key_len] == key {
                return slot;
            }
            slot = (slot + 1) & (self.capacity - 1);
        }
    }

    /// Id of `key`, inserting it if absent.
    pub fn insert(&mut self, key: &[i32]) -> u32 {
        debug_assert_eq!(key.len(), self.key_len);
        if 2 * (self.len() + 1) > self.capacity {
            self.grow();
        }
        let (w, id) = (self.key_len + 1, self.len() as i32);
        let slot = self.probe(key);
        let s = &mut self.slots[slot * w..(slot + 1) * w];
        if s[w - 1] != EMPTY {
            return s[w - 1] as u32;
        }
        s[..w - 1].copy_from_slice(key);
        s[w - 1] = id;
        self.keys.extend_from_slice(key);
        id as u32
    }

    pub fn find(&self, key: &[i32]) -> Option<u32> {
        let slot = self.probe(key);
        let id = self.slots[slot * (self.key_len + 1) + self.key_len];
        (id != EMPTY).then_some(id as u32)
    }

    fn grow(&mut self) {
        self.capacity *= 2;
        self.shift = 64 - self.capacity.trailing_zeros();
        self.slots = Self::empty_slots(self.key_len, self.capacity);
        let w = self.key_len + 1;
        for id in 0..self.len() {
            let slot = self.probe(self.key(id));
            let (k, n) = (id * self.key_len, self.key_len);
            self.slots[slot * w..slot * w + n].copy_from_slice(&self.keys[k..k + n]);
            self.slots[slot * w + n] = id as i32;
        }
    }
}
