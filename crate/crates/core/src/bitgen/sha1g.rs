//! SHA-1 based generator in the style of the FIPS 186 G function, as
//! shipped with the NIST statistical test suite.
//!
//! Each step computes `G(XKEY + XSEED)`, the SHA-1 compression function
//! applied once to the 160-bit value padded with zeros to a 512-bit block,
//! and then sets `XKEY = XKEY + G + 1 (mod 2^160)`.

const IV: [u32; 5] = [0x6745_2301, 0xefcd_ab89, 0x98ba_dcfe, 0x1032_5476, 0xc3d2_e1f0];

/// One application of the SHA-1 compression function.
pub fn sha1_compress(state: &mut [u32; 5], block: &[u8; 64]) {
    let mut w = [0u32; 80];
    for (t, chunk) in block.chunks_exact(4).enumerate() {
        w[t] = u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    for t in 16..80 {
        w[t] = (w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]).rotate_left(1);
    }
    let [mut a, mut b, mut c, mut d, mut e] = *state;
    for (t, &wt) in w.iter().enumerate() {
        let (f, k) = match t {
            0..=19 => ((b & c) | (!b & d), 0x5a82_7999),
            20..=39 => (b ^ c ^ d, 0x6ed9_eba1),
            40..=59 => ((b & c) | (b & d) | (c & d), 0x8f1b_bcdc),
            _ => (b ^ c ^ d, 0xca62_c1d6u32),
        };
        let tmp = a
            .rotate_left(5)
            .wrapping_add(f)
            .wrapping_add(e)
            .wrapping_add(k)
            .wrapping_add(wt);
        e = d;
        d = c;
        c = b.rotate_left(30);
        b = a;
        a = tmp;
    }
    for (s, v) in state.iter_mut().zip([a, b, c, d, e]) {
        *s = s.wrapping_add(v);
    }
}

/// Big-endian addition modulo 2^160.
fn add_be(acc: &mut [u8; 20], other: &[u8; 20]) {
    let mut carry = 0u16;
    for i in (0..20).rev() {
        let v = acc[i] as u16 + other[i] as u16 + carry;
        acc[i] = v as u8;
        carry = v >> 8;
    }
}

#[derive(Clone)]
pub struct Sha1Generator {
    xkey: [u8; 20],
    xseed: [u8; 20],
    out: [u32; 5],
    next: usize,
}

impl Sha1Generator {
    pub fn new(xkey: [u8; 20], xseed: [u8; 20]) -> Self {
        Self {
            xkey,
            xseed,
            out: [0; 5],
            next: 5,
        }
    }

    /// Build from arbitrary seed bytes: the first 20 bytes form XKEY and the
    /// next (up to) 20 form XSEED, each read as a big-endian integer.
    pub fn from_seed(seed: &[u8]) -> Self {
        let (k, s) = seed.split_at(seed.len().min(20));
        let s = &s[..s.len().min(20)];
        let mut xkey = [0u8; 20];
        xkey[20 - k.len()..].copy_from_slice(k);
        let mut xseed = [0u8; 20];
        xseed[20 - s.len()..].copy_from_slice(s);
        Self::new(xkey, xseed)
    }

    /// Produce the next 160-bit output block.
    pub fn next_block(&mut self) -> [u8; 20] {
        let mut xval = self.xkey;
        add_be(&mut xval, &self.xseed);
        let mut block = [0u8; 64];
        block[..20].copy_from_slice(&xval);
        let mut state = IV;
        sha1_compress(&mut state, &block);
        let mut g = [0u8; 20];
        for (chunk, word) in g.chunks_exact_mut(4).zip(state) {
            chunk.copy_from_slice(&word.to_be_bytes());
        }
        add_be(&mut self.xkey, &g);
        let mut one = [0u8; 20];
        one[19] = 1;
        add_be(&mut self.xkey, &one);
        g
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.next == 5 {
            let g = self.next_block();
            for (w, chunk) in self.out.iter_mut().zip(g.chunks_exact(4)) {
                *w = u32::from_be_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
            self.next = 0;
        }
        let w = self.out[self.next];
        self.next += 1;
        w
    }
}
