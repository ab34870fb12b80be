//! WELL19937a (no tempering).

const R: usize = 624;
const M1: usize = 70;
const M2: usize = 179;
const M3: usize = 449;
const MASKU: u32 = 0x7fff_ffff;
const MASKL: u32 = !MASKU;

#[derive(Clone)]
pub struct Well19937a {
    state: [u32; R],
    i: usize,
}

impl Well19937a {
    pub fn from_state(state: [u32; R]) -> Self {
        Self { state, i: 0 }
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        let s = &mut self.state;
        let i = self.i;
        let at = |k: usize| (i + k) % R;
        let z0 = (s[at(R - 1)] & MASKL) | (s[at(R - 2)] & MASKU);
        let v0 = s[i];
        let vm1 = s[at(M1)];
        let vm2 = s[at(M2)];
        let vm3 = s[at(M3)];
        let z1 = (v0 ^ (v0 << 25)) ^ (vm1 ^ (vm1 >> 27));
        let z2 = (vm2 >> 9) ^ (vm3 ^ (vm3 >> 1));
        let new_v1 = z1 ^ z2;
        s[i] = new_v1;
        let new_v0 = z0 ^ (z1 ^ (z1 << 9)) ^ (z2 ^ (z2 << 21)) ^ (new_v1 ^ (new_v1 >> 21));
        let j = at(R - 1);
        s[j] = new_v0;
        self.i = j;
        new_v0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct transcription of the reference WELL19937a code with its
    /// explicit case split on the state index.
    struct Reference {
        s: [u32; R],
        i: usize,
    }

    impl Reference {
        fn step(&mut self) -> u32 {
            let s = &mut self.s;
            let i = self.i;
            let (vrm1, vrm2) = match i {
                0 => (s[R - 1], s[R - 2]),
                1 => (s[0], s[R - 1]),
                _ => (s[i - 1], s[i - 2]),
            };
            let vm1 = if i + M1 >= R { s[i + M1 - R] } else { s[i + M1] };
            let vm2 = if i + M2 >= R { s[i + M2 - R] } else { s[i + M2] };
            let vm3 = if i + M3 >= R { s[i + M3 - R] } else { s[i + M3] };
            let z0 = (vrm1 & 0x8000_0000) | (vrm2 & 0x7fff_ffff);
            let z1 = (s[i] ^ (s[i] << 25)) ^ (vm1 ^ (vm1 >> 27));
            let z2 = (vm2 >> 9) ^ (vm3 ^ (vm3 >> 1));
            s[i] = z1 ^ z2;
            let nv0 = z0 ^ (z1 ^ (z1 << 9)) ^ (z2 ^ (z2 << 21)) ^ (s[i] ^ (s[i] >> 21));
            let j = if i == 0 { R - 1 } else { i - 1 };
            s[j] = nv0;
            self.i = j;
            s[j]
        }
    }

    #[test]
    fn matches_case_split_reference() {
        let mut init = [0u32; R];
        let mut x = 0x1234_5678u32;
        for w in init.iter_mut() {
            x ^= x << 13;
            x ^= x >> 17;
            x ^= x << 5;
            *w = x;
        }
        let mut fast = Well19937a::from_state(init);
        let mut slow = Reference { s: init, i: 0 };
        for _ in 0..5 * R {
            assert_eq!(fast.next_u32(), slow.step());
        }
    }
}
