//! Constant matrices of the system, entered display by display.
//!
//! `S_FIRST_ROWS[l]` is the first row of the upper-triangular Toeplitz matrix
//! `S_l`. Each `V_l(i)` keeps its scalar prefactor apart from the integer
//! table it multiplies.

/// An integer table with a scalar prefactor in front.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Display {
    pub prefactor: i64,
    pub rows: &'static [&'static [i64]],
}

pub const S_FIRST_ROWS: [&[i64]; 3] = [
    &[1, -4, 8, -12],
    &[-1, 6, -18, 38, -66, 102],
    &[1, -8, 32, -88, 192, -360, 608, -952],
];

pub const V0_0: Display = Display {
    prefactor: 4,
    rows: &[
        &[4, -5, -2, 3],
        &[-3, 4, 1, -2],
        &[2, -3, 0, 1],
        &[-1, 2, -1, 0],
    ],
};

pub const V0_1: Display = Display {
    prefactor: 4,
    rows: &[
        &[3, -6, 3, 0],
        &[-2, 4, -2, 0],
        &[1, -2, 1, 0],
        &[0, 0, 0, 0],
    ],
};

pub const V1_0: Display = Display {
    prefactor: 1,
    rows: &[
        &[146, -198, -180, 268, 66, -102],
        &[-102, 146, 108, -180, -38, 66],
        &[66, -102, -52, 108, 18, -38],
        &[-38, 66, 12, -52, -6, 18],
        &[18, -38, 12, 12, 2, -6],
        &[-6, 18, -20, 12, -6, 2],
    ],
};

pub const V1_1: Display = Display {
    prefactor: 1,
    rows: &[
        &[240, -516, 108, 372, -204, 0],
        &[-160, 348, -84, -236, 132, 0],
        &[96, -212, 60, 132, -76, 0],
        &[-48, 108, -36, -60, 36, 0],
        &[16, -36, 12, 20, -12, 0],
        &[0, -4, 12, -12, 4, 0],
    ],
};

pub const V1_2: Display = Display {
    prefactor: 1,
    rows: &[
        &[102, -306, 306, -102, 0, 0],
        &[-66, 198, -198, 66, 0, 0],
        &[38, -114, 114, -38, 0, 0],
        &[-18, 54, -54, 18, 0, 0],
        &[6, -18, 18, -6, 0, 0],
        &[-2, 6, -6, 2, 0, 0],
    ],
};

pub const V2_0: Display = Display {
    prefactor: 8,
    rows: &[
        &[176, -249, -364, 545, 280, -431, -76, 119],
        &[-119, 176, 227, -364, -169, 280, 45, -76],
        &[76, -119, -128, 227, 92, -169, -24, 45],
        &[-45, 76, 61, -128, -43, 92, 11, -24],
        &[24, -45, -20, 61, 16, -43, -4, 11],
        &[-11, 24, -1, -20, -5, 16, 1, -4],
        &[4, -11, 8, -1, 4, -5, 0, 1],
        &[-1, 4, -7, 8, -7, 4, -1, 0],
    ],
};

pub const V2_1: Display = Display {
    prefactor: 8,
    rows: &[
        &[455, -1020, -113, 1552, -603, -628, 357, 0],
        &[-300, 682, 44, -996, 404, 394, -228, 0],
        &[185, -428, -3, 592, -253, -228, 135, 0],
        &[-104, 246, -16, -316, 144, 118, -72, 0],
        &[51, -124, 19, 144, -71, -52, 33, 0],
        &[-20, 50, -12, -52, 28, 18, -12, 0],
        &[5, -12, 1, 16, -9, -4, 3, 0],
        &[0, -2, 8, -12, 8, -2, 0, 0],
    ],
};

pub const V2_2: Display = Display {
    prefactor: 8,
    rows: &[
        &[400, -1243, 972, 542, -1028, 357, 0, 0],
        &[-259, 808, -642, -332, 653, -228, 0, 0],
        &[156, -489, 396, 186, -384, 135, 0, 0],
        &[-85, 268, -222, -92, 203, -72, 0, 0],
        &[40, -127, 108, 38, -92, 33, 0, 0],
        &[-15, 48, -42, -12, 33, -12, 0, 0],
        &[4, -13, 12, 2, -8, 3, 0, 0],
        &[-1, 4, -6, 4, -1, 0, 0, 0],
    ],
};

pub const V2_3: Display = Display {
    prefactor: 8,
    rows: &[
        &[119, -476, 714, -476, 119, 0, 0, 0],
        &[-76, 304, -456, 304, -76, 0, 0, 0],
        &[45, -180, 270, -180, 45, 0, 0, 0],
        &[-24, 96, -144, 96, -24, 0, 0, 0],
        &[11, -44, 66, -44, 11, 0, 0, 0],
        &[-4, 16, -24, 16, -4, 0, 0, 0],
        &[1, -4, 6, -4, 1, 0, 0, 0],
        &[0, 0, 0, 0, 0, 0, 0, 0],
    ],
};

pub const V_DISPLAYS: [&[Display]; 3] = [
    &[V0_0, V0_1],
    &[V1_0, V1_1, V1_2],
    &[V2_0, V2_1, V2_2, V2_3],
];

#[cfg(test)]
mod tests {
    use super::*;

    const MODULUS: i64 = 1_000_000_007;

    /// `sum x * 31^row * 37^col mod p`
    fn checksum(rows: &[&[i64]]) -> i64 {
        let mut acc = 0i64;
        let mut pr = 1i64;
        for row in rows {
            let mut pc = 1i64;
            for &x in *row {
                acc = (acc + x.rem_euclid(MODULUS) * pr % MODULUS * pc) % MODULUS;
                pc = pc * 37 % MODULUS;
            }
            pr = pr * 31 % MODULUS;
        }
        acc
    }

    #[test]
    fn table_checksums() {
        let expected: [&[i64]; 3] = [
            &[7019136, 1168992],
            &[243423367, 69246309, 322181988],
            &[704172652, 983704472, 614929275, 199376748],
        ];
        for l in 0..3 {
            for (i, d) in V_DISPLAYS[l].iter().enumerate() {
                assert_eq!(checksum(d.rows), expected[l][i], "V_{l}({i})");
            }
        }
        let s_expected = [999402976, 951289339, 206848377];
        for l in 0..3 {
            assert_eq!(checksum(&[S_FIRST_ROWS[l]]), s_expected[l], "S_{l}");
        }
    }

    #[test]
    fn shapes_and_prefactors() {
        for l in 0..3 {
            let n = 4 + 2 * l;
            assert_eq!(S_FIRST_ROWS[l].len(), n);
            assert_eq!(V_DISPLAYS[l].len(), 2 + l);
            for d in V_DISPLAYS[l] {
                assert_eq!(d.rows.len(), n);
                assert!(d.rows.iter().all(|r| r.len() == n));
            }
        }
        assert!(V_DISPLAYS[0].iter().all(|d| d.prefactor == 4));
        assert!(V_DISPLAYS[1].iter().all(|d| d.prefactor == 1));
        assert!(V_DISPLAYS[2].iter().all(|d| d.prefactor == 8));
    }
}
