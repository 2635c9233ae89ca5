use super::SdwError;

/// Waveguide occupation patterns with at most one photon per box and at
/// most `cap` photons in total.
///
/// Mode `row·N + n` is box `n` of row `row`; a pattern is the bitmask of
/// occupied modes. States are ordered by photon number, then colexically,
/// which gives a closed-form index for `cap ≤ 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveguideBasis {
    boxes: usize,
    rows: usize,
    cap: usize,
    states: Vec<u128>,
}

pub const MAX_MODES: usize = 128;

impl WaveguideBasis {
    pub fn new(boxes: usize, rows: usize, cap: usize) -> Result<Self, SdwError> {
        if !(1..=2).contains(&cap) {
            return Err(SdwError::PhotonCap(cap));
        }
        let modes = boxes * rows;
        if boxes == 0 || !(1..=2).contains(&rows) || modes > MAX_MODES {
            return Err(SdwError::Modes { boxes, rows });
        }
        let mut states = Vec::with_capacity(expected_size(modes, cap));
        states.push(0);
        states.extend((0..modes).map(|b| 1u128 << b));
        if cap == 2 {
            for hi in 1..modes {
                states.extend((0..hi).map(|lo| (1u128 << hi) | (1u128 << lo)));
            }
        }
        Ok(Self { boxes, rows, cap, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn boxes(&self) -> usize {
        self.boxes
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn modes(&self) -> usize {
        self.boxes * self.rows
    }

    pub fn mode(&self, row: usize, n: usize) -> usize {
        debug_assert!(row < self.rows && n < self.boxes);
        row * self.boxes + n
    }

    pub fn mask(&self, index: usize) -> u128 {
        self.states[index]
    }

    pub fn states(&self) -> &[u128] {
        &self.states
    }

    pub fn index_of(&self, mask: u128) -> Option<usize> {
        let modes = self.modes();
        if modes < MAX_MODES && mask >> modes != 0 {
            return None;
        }
        match mask.count_ones() as usize {
            0 => Some(0),
            1 => Some(1 + mask.trailing_zeros() as usize),
            2 if self.cap == 2 => {
                let lo = mask.trailing_zeros() as usize;
                let hi = 127 - mask.leading_zeros() as usize;
                Some(1 + modes + hi * (hi - 1) / 2 + lo)
            }
            _ => None,
        }
    }

    /// Photons in box 0 of `row` leave the waveguide there.
    pub fn output_mask(&self) -> u128 {
        (0..self.rows).fold(0, |m, r| m | 1u128 << self.mode(r, 0))
    }

    /// Every row moves one box towards its output: `n → n − 1`. Box 0 must
    /// already be empty.
    pub fn shifted(&self, mask: u128) -> u128 {
        debug_assert_eq!(mask & self.output_mask(), 0);
        let row_bits = if self.boxes == 128 { u128::MAX } else { (1u128 << self.boxes) - 1 };
        (0..self.rows).fold(0, |acc, r| {
            let shift = r * self.boxes;
            acc | ((((mask >> shift) & row_bits) >> 1) << shift)
        })
    }
}

/// `Σ_{j ≤ cap} C(modes, j)`.
pub fn expected_size(modes: usize, cap: usize) -> usize {
    let mut total = 0;
    let mut binom = 1usize;
    for j in 0..=cap.min(modes) {
        total += binom;
        binom = binom * (modes - j) / (j + 1);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_sizes() {
        assert_eq!(WaveguideBasis::new(20, 1, 2).unwrap().len() * 2, 422);
        assert_eq!(WaveguideBasis::new(20, 2, 2).unwrap().len() * 4, 3284);
        let b = WaveguideBasis::new(2, 1, 1).unwrap();
        assert_eq!(b.states(), &[0, 1, 2]);
    }

    #[test]
    fn index_inverts_mask() {
        for (n, rows, cap) in [(5, 1, 1), (7, 2, 2), (64, 2, 2), (1, 1, 2)] {
            let b = WaveguideBasis::new(n, rows, cap).unwrap();
            assert_eq!(b.len(), expected_size(n * rows, cap));
            for (i, &m) in b.states().iter().enumerate() {
                assert!(m.count_ones() as usize <= cap);
                assert_eq!(b.index_of(m), Some(i));
            }
        }
    }

    #[test]
    fn out_of_basis_patterns_have_no_index() {
        let b = WaveguideBasis::new(4, 1, 1).unwrap();
        assert_eq!(b.index_of(0b11), None);
        assert_eq!(b.index_of(1 << 4), None);
    }

    #[test]
    fn cap_and_size_limits() {
        assert!(matches!(WaveguideBasis::new(4, 1, 3), Err(SdwError::PhotonCap(3))));
        assert!(matches!(WaveguideBasis::new(4, 1, 0), Err(SdwError::PhotonCap(0))));
        assert!(WaveguideBasis::new(65, 2, 1).is_err());
        assert!(WaveguideBasis::new(64, 2, 1).is_ok());
    }

    #[test]
    fn shift_moves_towards_output() {
        let b = WaveguideBasis::new(5, 2, 2).unwrap();
        let r3 = 1u128 << b.mode(1, 3);
        assert_eq!(b.shifted(r3), 1u128 << b.mode(1, 2));
        let pair = (1u128 << b.mode(0, 1)) | (1u128 << b.mode(1, 4));
        assert_eq!(b.shifted(pair), (1u128 << b.mode(0, 0)) | (1u128 << b.mode(1, 3)));
        assert_eq!(b.shifted(0), 0);
    }
}
