//! Greedy and beam decoding against a hand-written next-character model,
//! showing how beam search can beat the greedy path.

use superchat::corpus::ClassIndex;
use superchat::decoder::{decode_beam, decode_greedy, BeamOptions, DecodeError, NextCharModel};

/// Classes: 0 = EOS, 1 = 'a', 2 = 'b'. Greedy takes 'a' (0.6) first, but
/// everything after 'a' is uncertain; 'b' leads to a confident EOS.
struct Table;

impl NextCharModel for Table {
    fn num_classes(&self) -> usize {
        3
    }
    fn input_capacity(&self) -> usize {
        4
    }
    fn response_capacity(&self) -> usize {
        4
    }
    fn class_char(&self, class: ClassIndex) -> Option<char> {
        ['a', 'b'].get(class.wrapping_sub(1)).copied()
    }
    fn predict(&self, _input: &[char], partial: &[ClassIndex]) -> Result<Vec<f64>, DecodeError> {
        Ok(match partial {
            [] => vec![0.0001, 0.5999, 0.4],
            [2, ..] => vec![0.97, 0.015, 0.015],
            _ => vec![0.34, 0.33, 0.33],
        })
    }
}

fn main() -> Result<(), DecodeError> {
    let input = ['q'];
    let greedy = decode_greedy(&Table, &input)?;
    println!("greedy: {:?}", greedy.text);
    for width in [1, 2, 4] {
        let beam = decode_beam(&Table, &input, width, BeamOptions::default())?;
        println!("beam {width}: {:?} (log p = {:.4})", beam.text, beam.best.log_score);
    }
    let normalized = decode_beam(&Table, &input, 4, BeamOptions { length_normalize: true })?;
    println!("beam 4, length-normalized: {:?}", normalized.text);
    Ok(())
}
