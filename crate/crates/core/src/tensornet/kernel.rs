//! Dense kernels over tensors whose legs all have dimension 2.
//!
//! Data is row-major with the first leg as the most significant bit.

use crate::C64;

use super::{Leg, Tensor};

/// For each chunk of 8 output bits, the source offsets those bits map to.
fn gather_tables(src_legs: &[Leg], dst_legs: &[Leg]) -> Vec<Vec<usize>> {
    let rank = dst_legs.len();
    let src_bit: Vec<usize> = dst_legs
        .iter()
        .map(|l| {
            let pos = src_legs.iter().position(|s| s == l).expect("leg present in source");
            src_legs.len() - 1 - pos
        })
        .collect();
    let mut tables = Vec::new();
    let mut start = 0;
    while start < rank {
        let width = (rank - start).min(8);
        let mut table = vec![0usize; 1 << width];
        for (value, slot) in table.iter_mut().enumerate() {
            let mut off = 0;
            for b in 0..width {
                if value >> b & 1 == 1 {
                    // output bit (start + b) counted from the least significant end
                    let dst_pos = rank - 1 - (start + b);
                    off |= 1 << src_bit[dst_pos];
                }
            }
            *slot = off;
        }
        tables.push(table);
        start += width;
    }
    tables
}

/// Reorders `t` so its legs follow `order`, which must be a permutation of `t.legs`.
pub fn permute(t: &Tensor, order: &[Leg]) -> Tensor {
    debug_assert_eq!(t.legs.len(), order.len());
    if t.legs == order {
        return t.clone();
    }
    let tables = gather_tables(&t.legs, order);
    let len = t.data.len();
    let mut data = Vec::with_capacity(len);
    for o in 0..len {
        let mut src = 0;
        for (c, table) in tables.iter().enumerate() {
            src |= table[(o >> (8 * c)) & (table.len() - 1)];
        }
        data.push(t.data[src]);
    }
    Tensor {
        legs: order.to_vec(),
        data,
    }
}

/// Restricts `leg` to `value`, dropping the leg.
pub fn fix_leg(t: &Tensor, leg: Leg, value: u8) -> Tensor {
    let mut order = vec![leg];
    order.extend(t.legs.iter().copied().filter(|&l| l != leg));
    let p = permute(t, &order);
    let half = p.data.len() / 2;
    let start = value as usize * half;
    Tensor {
        legs: order[1..].to_vec(),
        data: p.data[start..start + half].to_vec(),
    }
}

/// Sums over the listed legs.
pub fn sum_legs(t: &Tensor, legs: &[Leg]) -> Tensor {
    if legs.is_empty() {
        return t.clone();
    }
    let mut order: Vec<Leg> = t.legs.iter().copied().filter(|l| !legs.contains(l)).collect();
    let kept = order.len();
    order.extend_from_slice(legs);
    let p = permute(t, &order);
    let block = 1usize << legs.len();
    let data = p.data.chunks(block).map(|c| c.iter().sum()).collect();
    Tensor {
        legs: order[..kept].to_vec(),
        data,
    }
}

/// Contracts two tensors. Legs for which `keep` is true survive (shared ones
/// act as batch legs); all others are summed.
pub fn contract_pair(a: &Tensor, b: &Tensor, keep: impl Fn(Leg) -> bool) -> Tensor {
    let in_b = |l: &Leg| b.legs.contains(l);
    let in_a = |l: &Leg| a.legs.contains(l);

    let a_sum: Vec<Leg> = a.legs.iter().copied().filter(|l| !in_b(l) && !keep(*l)).collect();
    let b_sum: Vec<Leg> = b.legs.iter().copied().filter(|l| !in_a(l) && !keep(*l)).collect();
    let a_red;
    let a = if a_sum.is_empty() {
        a
    } else {
        a_red = sum_legs(a, &a_sum);
        &a_red
    };
    let b_red;
    let b = if b_sum.is_empty() {
        b
    } else {
        b_red = sum_legs(b, &b_sum);
        &b_red
    };

    let batch: Vec<Leg> = a
        .legs
        .iter()
        .copied()
        .filter(|l| b.legs.contains(l) && keep(*l))
        .collect();
    let con: Vec<Leg> = a
        .legs
        .iter()
        .copied()
        .filter(|l| b.legs.contains(l) && !keep(*l))
        .collect();
    let a_free: Vec<Leg> = a.legs.iter().copied().filter(|l| !b.legs.contains(l)).collect();
    let b_free: Vec<Leg> = b.legs.iter().copied().filter(|l| !a.legs.contains(l)).collect();

    let a_order: Vec<Leg> = batch.iter().chain(&a_free).chain(&con).copied().collect();
    let b_order: Vec<Leg> = batch.iter().chain(&con).chain(&b_free).copied().collect();
    let ap = permute(a, &a_order);
    let bp = permute(b, &b_order);

    let nb = 1usize << batch.len();
    let m = 1usize << a_free.len();
    let k = 1usize << con.len();
    let n = 1usize << b_free.len();
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![zero; nb * m * n];
    for t in 0..nb {
        let a_block = &ap.data[t * m * k..(t + 1) * m * k];
        let b_block = &bp.data[t * k * n..(t + 1) * k * n];
        let o_block = &mut out[t * m * n..(t + 1) * m * n];
        for i in 0..m {
            let row = &mut o_block[i * n..(i + 1) * n];
            for p in 0..k {
                let av = a_block[i * k + p];
                if av == zero {
                    continue;
                }
                let b_row = &b_block[p * n..(p + 1) * n];
                for (o, bv) in row.iter_mut().zip(b_row) {
                    *o += av * bv;
                }
            }
        }
    }
    let legs = batch.iter().chain(&a_free).chain(&b_free).copied().collect();
    Tensor { legs, data: out }
}
