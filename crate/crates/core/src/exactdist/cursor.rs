/// Walks every x ∈ Z≥0^{k+1} with Σx_i = n_b once, in colexicographic order
/// starting from (n_b, 0, …, 0).
#[derive(Clone, Debug)]
pub struct CompositionCursor {
    current: Vec<u64>,
    exhausted: bool,
}

impl CompositionCursor {
    pub fn new(k: usize, n_b: u64) -> Self {
        let mut current = vec![0; k + 1];
        current[0] = n_b;
        Self {
            current,
            exhausted: false,
        }
    }

    pub fn current(&self) -> Option<&[u64]> {
        (!self.exhausted).then_some(self.current.as_slice())
    }

    /// Moves to the successor; returns false once past the last element.
    pub fn advance(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        let x = &mut self.current;
        let k = x.len() - 1;
        match x.iter().position(|&v| v > 0) {
            Some(j) if j < k => {
                let v = x[j];
                x[j] = 0;
                x[j + 1] += 1;
                x[0] = v - 1;
                true
            }
            _ => {
                self.exhausted = true;
                false
            }
        }
    }

    /// Calls `f` on every composition.
    pub fn for_each(k: usize, n_b: u64, mut f: impl FnMut(&[u64])) {
        let mut c = Self::new(k, n_b);
        loop {
            f(&c.current);
            if !c.advance() {
                break;
            }
        }
    }
}
