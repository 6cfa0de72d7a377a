/// Enumerates the XOR masks of every `radius`-subset of bit indices in
/// `0..length`, lexicographically over the sorted index tuples.
///
/// `ShellMasks::new(4, 2)` yields the masks for {0,1}, {0,2}, {0,3}, {1,2}, {1,3}, {2,3}.
#[derive(Debug, Clone)]
pub struct ShellMasks {
    length: u32,
    indices: Vec<u32>,
    mask: u64,
    done: bool,
}

impl ShellMasks {
    pub fn new(length: u32, radius: u32) -> Self {
        let indices: Vec<u32> = (0..radius).collect();
        let mask = indices.iter().fold(0u64, |m, &i| m | 1 << i);
        Self {
            length,
            indices,
            mask,
            done: radius > length,
        }
    }
}

impl Iterator for ShellMasks {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let current = self.mask;
        let r = self.indices.len();
        // rightmost index that can still move forward
        match (0..r)
            .rev()
            .find(|&i| self.indices[i] < self.length - (r - i) as u32)
        {
            None => self.done = true,
            Some(i) => {
                for k in i..r {
                    self.mask &= !(1u64 << self.indices[k]);
                }
                let start = self.indices[i] + 1;
                for (offset, k) in (i..r).enumerate() {
                    self.indices[k] = start + offset as u32;
                    self.mask |= 1u64 << self.indices[k];
                }
            }
        }
        Some(current)
    }
}
