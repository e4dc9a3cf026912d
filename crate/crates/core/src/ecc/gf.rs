/// GF(2^m) with log/antilog tables. Elements are integers in `0..2^m`.
#[derive(Debug, Clone)]
pub struct GaloisField {
    m: u32,
    order: usize,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    /// Builds the field from a primitive polynomial given as a bit mask
    /// including the `x^m` term, e.g. `0x11d` for x^8 + x^4 + x^3 + x^2 + 1.
    ///
    /// Panics if the polynomial is not primitive.
    pub fn new(m: u32, primitive_poly: u32) -> Self {
        let order = (1usize << m) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for i in 0..order {
            exp[i] = x as u16;
            assert!(
                i == 0 || x != 1,
                "polynomial {primitive_poly:#x} is not primitive over GF(2^{m})"
            );
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= primitive_poly;
            }
        }
        assert_eq!(x, 1, "polynomial {primitive_poly:#x} is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        GaloisField { m, order, exp, log }
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Multiplicative group order, 2^m - 1.
    pub fn order(&self) -> usize {
        self.order
    }

    /// alpha^i for any (possibly large) exponent.
    pub fn alpha_pow(&self, i: usize) -> u16 {
        self.exp[i % self.order]
    }

    pub fn log(&self, a: u16) -> usize {
        debug_assert!(a != 0, "log of zero");
        self.log[a as usize] as usize
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "inverse of zero");
        self.exp[(self.order - self.log[a as usize] as usize) % self.order]
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }
}
