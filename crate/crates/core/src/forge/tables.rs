//! The two fixed 22-entry (4, 2) codebooks: the standard dense table and the
//! sparse one built from Schubert cells.
//!
//! Entries are spelled with one character each: `0`, `1`, `-` (−1), `j`
//! and `J` (−j). A codeword is four rows of two characters.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::grassmann::{Codebook, CodebookMeta, Codeword};
use crate::linalg::{CMatrix, C64};

const SHARED: [[&str; 4]; 6] = [
    ["10", "01", "00", "00"],
    ["10", "00", "01", "00"],
    ["10", "00", "00", "01"],
    ["00", "10", "01", "00"],
    ["00", "10", "00", "01"],
    ["00", "00", "10", "01"],
];

const NR_HALF_SQRT: [[&str; 4]; 8] = [
    ["10", "01", "10", "0J"],
    ["10", "01", "10", "0j"],
    ["10", "01", "J0", "01"],
    ["10", "01", "J0", "0-"],
    ["10", "01", "-0", "0J"],
    ["10", "01", "-0", "0j"],
    ["10", "01", "j0", "01"],
    ["10", "01", "j0", "0-"],
];

const NR_HALF: [[&str; 4]; 8] = [
    ["11", "11", "1-", "1-"],
    ["11", "11", "jJ", "jJ"],
    ["11", "jj", "1-", "jJ"],
    ["11", "jj", "jJ", "-1"],
    ["11", "--", "1-", "-1"],
    ["11", "--", "jJ", "Jj"],
    ["11", "JJ", "1-", "Jj"],
    ["11", "JJ", "jJ", "1-"],
];

const PROPOSED_HALF_SQRT: [[&str; 4]; 16] = [
    ["10", "01", "J0", "01"],
    ["10", "01", "10", "0j"],
    ["10", "01", "10", "0J"],
    ["10", "01", "J0", "0-"],
    ["10", "01", "j0", "0-"],
    ["10", "01", "-0", "0j"],
    ["10", "01", "j0", "01"],
    ["10", "01", "-0", "0J"],
    ["10", "-0", "01", "0-"],
    ["10", "j0", "01", "0J"],
    ["10", "J0", "01", "0J"],
    ["10", "10", "01", "0j"],
    ["10", "01", "0-", "-0"],
    ["10", "01", "0J", "j0"],
    ["10", "01", "0J", "J0"],
    ["10", "01", "0j", "10"],
];

fn symbol(c: char, scale: f64) -> C64 {
    match c {
        '0' => C64::new(0.0, 0.0),
        '1' => C64::new(scale, 0.0),
        '-' => C64::new(-scale, 0.0),
        'j' => C64::new(0.0, scale),
        'J' => C64::new(0.0, -scale),
        other => unreachable!("bad table symbol {other:?}"),
    }
}

fn decode(rows: &[&str; 4], scale: f64) -> Codeword {
    let data = rows
        .iter()
        .flat_map(|r| r.chars().map(|c| symbol(c, scale)))
        .collect();
    let matrix = CMatrix::new(4, 2, data).expect("4x2 table entry");
    Codeword::new(matrix).expect("table entries are orthonormal")
}

fn assemble(blocks: &[(&[[&str; 4]], f64)], method: &str) -> Codebook {
    let words = blocks
        .iter()
        .flat_map(|(rows, scale)| rows.iter().map(move |r| decode(r, *scale)))
        .collect();
    Codebook::new(words, CodebookMeta::new(method)).expect("nonempty table")
}

/// The 22-entry dense (4, 2) table with entries in `{0, ±1, ±j}` scaled by
/// 1, 1/sqrt(2) or 1/2.
pub fn nr_codebook_4_2() -> Codebook {
    assemble(
        &[
            (&SHARED, 1.0),
            (&NR_HALF_SQRT, FRAC_1_SQRT_2),
            (&NR_HALF, 0.5),
        ],
        "nr-table",
    )
}

/// The 22-entry sparse (4, 2) table.
pub fn proposed_codebook_4_2() -> Codebook {
    assemble(
        &[(&SHARED, 1.0), (&PROPOSED_HALF_SQRT, FRAC_1_SQRT_2)],
        "proposed-table",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{min_chordal_distance, validate_stiefel};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sizes_and_stiefel() {
        for book in [nr_codebook_4_2(), proposed_codebook_4_2()] {
            assert_eq!(book.len(), 22);
            assert_eq!((book.t(), book.m()), (4, 2));
            for w in book.codewords() {
                assert!(validate_stiefel(w.matrix(), 1e-12));
            }
        }
    }

    #[test]
    fn nr_first_and_fifteenth() {
        let nr = nr_codebook_4_2();
        assert_eq!(nr.get(0).unwrap().matrix(), &CMatrix::eye(4, 2));
        let w = nr.get(14).unwrap().matrix();
        let expect =
            CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5], &[0.5, -0.5], &[0.5, -0.5]]);
        assert_eq!(w, &expect);
    }

    #[test]
    fn proposed_seventh_and_last() {
        let p = proposed_codebook_4_2();
        let s = FRAC_1_SQRT_2;
        let w7 = p.get(6).unwrap().matrix();
        assert_eq!(
            w7.column(0),
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, -s), c(0.0, 0.0)]
        );
        assert_eq!(
            w7.column(1),
            vec![c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0), c(s, 0.0)]
        );
        let w22 = p.get(21).unwrap().matrix();
        assert_eq!(
            w22.column(0),
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]
        );
        assert_eq!(
            w22.column(1),
            vec![c(0.0, 0.0), c(s, 0.0), c(0.0, s), c(0.0, 0.0)]
        );
    }

    #[test]
    fn proposed_mcd_is_one() {
        let md = min_chordal_distance(&proposed_codebook_4_2()).unwrap();
        assert!((md.value - 1.0).abs() < 1e-12, "{md:?}");
    }

    #[test]
    fn nr_table_has_a_repeated_subspace() {
        let md = min_chordal_distance(&nr_codebook_4_2()).unwrap();
        assert!(md.value < 1e-12);
        assert_eq!(md.pair, (14, 15));
    }
}
