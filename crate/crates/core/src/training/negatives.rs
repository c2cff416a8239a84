use crate::error::{Error, Result};
use crate::graph::Triple;
use crate::numerics::RngStream;

/// One uniformly drawn entity different from `exclude`.
pub fn corrupt_tail(stream: &mut RngStream, exclude: usize, num_entities: usize) -> usize {
    let v = stream.below(num_entities - 1);
    if v >= exclude {
        v + 1
    } else {
        v
    }
}

/// `n` copies of `positive` with the tail replaced by an entity drawn uniformly
/// from everything except the true tail.
pub fn sample_negatives(
    stream: &mut RngStream,
    positive: &Triple,
    n: usize,
    num_entities: usize,
) -> Result<Vec<Triple>> {
    if num_entities < 2 {
        return Err(Error::InvalidParameter(
            "negative sampling needs at least two entities".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one negative".into()));
    }
    if positive.tail >= num_entities {
        return Err(Error::InvalidParameter(format!(
            "tail {} out of range",
            positive.tail
        )));
    }
    Ok((0..n)
        .map(|_| Triple {
            tail: corrupt_tail(stream, positive.tail, num_entities),
            ..*positive
        })
        .collect())
}
