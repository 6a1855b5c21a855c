//! Card and store populations.
//!
//! A card's expected monthly operation count is strict: the engine aims that
//! average. A store's size is relative and only ever used proportionally, so
//! populations of any size can be mixed freely. Populations are mutable only
//! between simulated days; during a day they are read-only.

use std::io::{BufRead, Write};

use crate::distmodel::{
    store_weight_from_bin, DistributionTable, MONTHLY_OPS_BINS, STORE_SIZE_BINS,
};
use crate::error::{Error, Result};
use crate::real::{real, real_from_count, Real};
use crate::rng::RandomStream;

/// One credit/debit card.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardProfile<R: Real = f64> {
    pub card_id: u64,
    /// Expected operations per 30-day month. Swaps only permute these values.
    pub expected_monthly_ops: R,
    /// Carried surplus of executed-minus-expected operations; starts at zero.
    pub inhibition_debt: R,
}

/// One store (or any other destination of a card operation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreProfile<R: Real = f64> {
    pub store_id: u64,
    /// Relative size; only the ratio to the population total matters.
    pub size_weight: R,
}

/// Create `n_cards` cards with ids `0..n_cards`, drawing each card's expected
/// monthly operation count from the 100-bin table (bin `k` means `k + 1`
/// operations per month).
pub fn init_cards<R: Real>(
    n_cards: u64,
    num_ops_table: &DistributionTable<R>,
    rng: &mut RandomStream,
) -> Result<Vec<CardProfile<R>>> {
    if n_cards == 0 {
        return Err(Error::Domain(
            "population must hold at least one card".into(),
        ));
    }
    if num_ops_table.bin_count() != MONTHLY_OPS_BINS {
        return Err(Error::BinMismatch {
            expected: MONTHLY_OPS_BINS,
            actual: num_ops_table.bin_count(),
        });
    }
    Ok((0..n_cards)
        .map(|card_id| CardProfile {
            card_id,
            expected_monthly_ops: real_from_count((num_ops_table.sample_bin(rng) + 1) as u64),
            inhibition_debt: R::zero(),
        })
        .collect())
}

/// Create `n_stores` stores with ids `0..n_stores`, drawing each size weight
/// from the 50-bin store table (bin midpoints, 20 units apart).
pub fn init_stores<R: Real>(
    n_stores: u64,
    store_table: &DistributionTable<R>,
    rng: &mut RandomStream,
) -> Result<Vec<StoreProfile<R>>> {
    if n_stores == 0 {
        return Err(Error::Domain(
            "population must hold at least one store".into(),
        ));
    }
    if store_table.bin_count() != STORE_SIZE_BINS {
        return Err(Error::BinMismatch {
            expected: STORE_SIZE_BINS,
            actual: store_table.bin_count(),
        });
    }
    (0..n_stores)
        .map(|store_id| {
            Ok(StoreProfile {
                store_id,
                size_weight: store_weight_from_bin(store_table.sample_bin(rng))?,
            })
        })
        .collect()
}

/// Randomly exchange expected activities between similar cards.
///
/// Each card triggers with probability `p_swap`; a partner is drawn uniformly
/// among cards whose expected activity differs by at most a factor of
/// `similarity_ratio`, and the two expected values trade places. With no
/// eligible partner the trigger is a no-op. The multiset of expected values
/// is invariant under any number of calls.
pub fn swap_activities<R: Real>(
    cards: &mut [CardProfile<R>],
    p_swap: R,
    similarity_ratio: R,
    rng: &mut RandomStream,
) -> Result<()> {
    if p_swap.is_nan() || p_swap < R::zero() || p_swap > R::one() {
        return Err(Error::Domain("swap probability must lie in [0, 1]".into()));
    }
    if similarity_ratio.is_nan() || similarity_ratio < R::one() {
        return Err(Error::Domain("similarity ratio must be at least 1".into()));
    }
    if p_swap == R::zero() || cards.len() < 2 {
        return Ok(());
    }

    // The multiset of expected values never changes, so sort it once and only
    // track which card currently sits at which sorted position.
    let mut order: Vec<usize> = (0..cards.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        cards[a]
            .expected_monthly_ops
            .partial_cmp(&cards[b].expected_monthly_ops)
            .expect("finite activities")
            .then(cards[a].card_id.cmp(&cards[b].card_id))
    });
    let sorted_values: Vec<R> = order
        .iter()
        .map(|&i| cards[i].expected_monthly_ops)
        .collect();
    let mut position_of = vec![0usize; cards.len()];
    for (pos, &card) in order.iter().enumerate() {
        position_of[card] = pos;
    }

    for i in 0..cards.len() {
        if rng.next_real::<R>() >= p_swap {
            continue;
        }
        let value = cards[i].expected_monthly_ops;
        let lo = sorted_values.partition_point(|v| *v < value / similarity_ratio);
        let hi = sorted_values.partition_point(|v| *v <= value * similarity_ratio);
        let eligible = hi - lo;
        if eligible <= 1 {
            continue; // only this card itself is in range
        }
        let own = position_of[i];
        let mut pick = lo + rng.next_index((eligible - 1) as u64) as usize;
        if pick >= own {
            pick += 1;
        }
        let partner = order[pick];

        let tmp = cards[i].expected_monthly_ops;
        cards[i].expected_monthly_ops = cards[partner].expected_monthly_ops;
        cards[partner].expected_monthly_ops = tmp;
        order.swap(own, pick);
        position_of.swap(i, partner);
    }
    Ok(())
}

const CARDS_HEADER: &str = "card_id,expected_monthly_ops";
const STORES_HEADER: &str = "store_id,size_weight";

/// Dump a card population as a two-column text table.
pub fn write_cards<R: Real, W: Write>(cards: &[CardProfile<R>], mut out: W) -> Result<()> {
    writeln!(out, "{CARDS_HEADER}")?;
    for c in cards {
        writeln!(out, "{},{}", c.card_id, c.expected_monthly_ops)?;
    }
    Ok(())
}

/// Load a card population dumped by [`write_cards`]. Debt restarts at zero.
pub fn read_cards<R: Real, B: BufRead>(input: B) -> Result<Vec<CardProfile<R>>> {
    parse_population(input, CARDS_HEADER, |id, value| CardProfile {
        card_id: id,
        expected_monthly_ops: value,
        inhibition_debt: R::zero(),
    })
}

/// Dump a store population as a two-column text table.
pub fn write_stores<R: Real, W: Write>(stores: &[StoreProfile<R>], mut out: W) -> Result<()> {
    writeln!(out, "{STORES_HEADER}")?;
    for s in stores {
        writeln!(out, "{},{}", s.store_id, s.size_weight)?;
    }
    Ok(())
}

/// Load a store population dumped by [`write_stores`].
pub fn read_stores<R: Real, B: BufRead>(input: B) -> Result<Vec<StoreProfile<R>>> {
    parse_population(input, STORES_HEADER, |id, value| StoreProfile {
        store_id: id,
        size_weight: value,
    })
}

fn parse_population<R: Real, B: BufRead, T>(
    input: B,
    header: &str,
    build: impl Fn(u64, R) -> T,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx as u64 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || (line_no == 1 && trimmed == header) {
            continue;
        }
        let (id, value) = trimmed.split_once(',').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected two comma-separated columns".into(),
        })?;
        let id: u64 = id.trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad id: {e}"),
        })?;
        let value: f64 = value.trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad value: {e}"),
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: "value must be finite and non-negative".into(),
            });
        }
        out.push(build(id, real(value)));
    }
    Ok(out)
}
