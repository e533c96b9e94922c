//! Canonical Huffman coding of quantization codes.
//!
//! Section layout: code-length table as runs over the whole alphabet
//! (`u32` run count, then `u8` length + `u32` run per entry), followed by
//! `u64` symbol count, `u64` bit length and the MSB-first packed bits.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::{CodecError, Reader};

const MAX_CODE_LEN: u8 = 64;

/// Code length per symbol for the given frequencies; a lone symbol gets
/// length 1.
fn code_lengths(freq: &BTreeMap<u32, u64>) -> Vec<(u32, u8)> {
    let symbols: Vec<u32> = freq.keys().copied().collect();
    match symbols.len() {
        0 => return Vec::new(),
        1 => return vec![(symbols[0], 1)],
        _ => {}
    }
    // nodes 0..n are leaves; internal nodes are appended
    let mut parent: Vec<usize> = vec![usize::MAX; symbols.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        symbols.iter().enumerate().map(|(i, s)| Reverse((freq[s], i))).collect();
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().unwrap();
        let Reverse((fb, b)) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a] = id;
        parent[b] = id;
        heap.push(Reverse((fa + fb, id)));
    }
    let mut depth = vec![0u8; parent.len()];
    for i in (0..parent.len()).rev() {
        if parent[i] != usize::MAX {
            depth[i] = depth[parent[i]] + 1;
        }
    }
    symbols
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            assert!(depth[i] <= MAX_CODE_LEN, "Huffman code longer than 64 bits");
            (s, depth[i])
        })
        .collect()
}

/// Canonical codes for (symbol, length) pairs, ordered by (length, symbol).
fn canonical(lengths: &[(u32, u8)]) -> Result<Vec<(u32, u8, u64)>, CodecError> {
    let mut sorted = lengths.to_vec();
    sorted.sort_by_key(|&(s, l)| (l, s));
    let mut out = Vec::with_capacity(sorted.len());
    let mut code: u128 = 0;
    let mut prev = 0u8;
    for (i, &(s, l)) in sorted.iter().enumerate() {
        if l == 0 || l > MAX_CODE_LEN {
            return Err(CodecError::HuffmanTable(format!("code length {l} for symbol {s}")));
        }
        if i > 0 {
            code += 1;
        }
        code <<= l - prev;
        if code >> l != 0 {
            return Err(CodecError::HuffmanTable("code lengths violate the Kraft inequality".into()));
        }
        out.push((s, l, code as u64));
        prev = l;
    }
    Ok(out)
}

fn write_table(out: &mut Vec<u8>, lengths: &[(u32, u8)], alphabet: u64) {
    let mut runs: Vec<(u8, u32)> = Vec::new();
    let mut push = |len: u8, count: u64| {
        let mut count = count;
        while count > 0 {
            let step = count.min(u32::MAX as u64);
            match runs.last_mut() {
                Some((l, r)) if *l == len && (*r as u64) + step <= u32::MAX as u64 => *r += step as u32,
                _ => runs.push((len, step as u32)),
            }
            count -= step;
        }
    };
    let mut next = 0u64;
    for &(s, l) in lengths {
        push(0, s as u64 - next);
        push(l, 1);
        next = s as u64 + 1;
    }
    push(0, alphabet - next);
    out.extend_from_slice(&(runs.len() as u32).to_le_bytes());
    for (l, r) in runs {
        out.push(l);
        out.extend_from_slice(&r.to_le_bytes());
    }
}

fn read_table(r: &mut Reader<'_>, alphabet: u64) -> Result<Vec<(u32, u8)>, CodecError> {
    let runs = r.u32("Huffman table")?;
    let mut lengths = Vec::new();
    let mut next = 0u64;
    for _ in 0..runs {
        let l = r.u8("Huffman table")?;
        let run = r.u32("Huffman table")? as u64;
        if next + run > alphabet {
            return Err(CodecError::HuffmanTable(format!("table covers more than {alphabet} symbols")));
        }
        if l != 0 {
            lengths.extend((next..next + run).map(|s| (s as u32, l)));
        }
        next += run;
    }
    if next != alphabet {
        return Err(CodecError::HuffmanTable(format!("table covers {next} of {alphabet} symbols")));
    }
    Ok(lengths)
}

/// Encodes `symbols`, each below `2^alphabet_bits`, as a self-contained
/// section.
pub fn huffman_encode(symbols: &[u32], alphabet_bits: u8) -> Vec<u8> {
    let alphabet = 1u64 << alphabet_bits;
    let mut freq: BTreeMap<u32, u64> = BTreeMap::new();
    for &s in symbols {
        assert!((s as u64) < alphabet, "symbol {s} outside a {alphabet_bits}-bit alphabet");
        *freq.entry(s).or_default() += 1;
    }
    let lengths = code_lengths(&freq);
    let codes = canonical(&lengths).expect("generated lengths are valid");
    let lookup: BTreeMap<u32, (u8, u64)> = codes.iter().map(|&(s, l, c)| (s, (l, c))).collect();

    let mut out = Vec::new();
    write_table(&mut out, &lengths, alphabet);
    let mut bytes = Vec::new();
    let mut acc = 0u8;
    let mut filled = 0u8;
    let mut bits = 0u64;
    for s in symbols {
        let (l, c) = lookup[s];
        for i in (0..l).rev() {
            acc = (acc << 1) | ((c >> i) & 1) as u8;
            filled += 1;
            if filled == 8 {
                bytes.push(acc);
                acc = 0;
                filled = 0;
            }
        }
        bits += l as u64;
    }
    if filled > 0 {
        bytes.push(acc << (8 - filled));
    }
    out.extend_from_slice(&(symbols.len() as u64).to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(&bytes);
    out
}

/// Decodes a section written by [`huffman_encode`], advancing the reader.
pub(crate) fn huffman_decode_from(r: &mut Reader<'_>, alphabet_bits: u8) -> Result<Vec<u32>, CodecError> {
    let lengths = read_table(r, 1u64 << alphabet_bits)?;
    let codes = canonical(&lengths)?;
    let count = r.u64("symbol count")?;
    let bits = r.u64("symbol bit length")?;
    let nbytes = bits.div_ceil(8);
    if nbytes > r.remaining() as u64 {
        return Err(CodecError::Truncated("coded symbols"));
    }
    let data = r.bytes(nbytes as usize, "coded symbols")?;
    if count > 0 && codes.is_empty() {
        return Err(CodecError::HuffmanTable("symbols present but the table is empty".into()));
    }
    if count > bits {
        return Err(CodecError::HuffmanTable(format!("{count} symbols cannot fit in {bits} bits")));
    }

    // per-length first code and offset into the canonical order
    let mut first_code = [0u64; MAX_CODE_LEN as usize + 1];
    let mut first_index = [0usize; MAX_CODE_LEN as usize + 1];
    let mut per_len = [0usize; MAX_CODE_LEN as usize + 1];
    for (i, &(_, l, c)) in codes.iter().enumerate().rev() {
        first_code[l as usize] = c;
        first_index[l as usize] = i;
        per_len[l as usize] += 1;
    }

    let mut out = Vec::with_capacity(count as usize);
    let mut pos = 0u64;
    for _ in 0..count {
        let mut code = 0u64;
        let mut found = None;
        for l in 1..=MAX_CODE_LEN as usize {
            if pos >= bits {
                return Err(CodecError::Truncated("coded symbols"));
            }
            let bit = (data[(pos / 8) as usize] >> (7 - pos % 8)) & 1;
            pos += 1;
            code = (code << 1) | bit as u64;
            if per_len[l] > 0 && code >= first_code[l] && code - first_code[l] < per_len[l] as u64 {
                found = Some(codes[first_index[l] + (code - first_code[l]) as usize].0);
                break;
            }
        }
        match found {
            Some(s) => out.push(s),
            None => return Err(CodecError::HuffmanTable("bit pattern matches no code".into())),
        }
    }
    if pos != bits {
        return Err(CodecError::HuffmanTable(format!("{} unused bits after the last symbol", bits - pos)));
    }
    Ok(out)
}

/// Decodes a complete section produced by [`huffman_encode`].
pub fn huffman_decode(bytes: &[u8], alphabet_bits: u8) -> Result<Vec<u32>, CodecError> {
    let mut r = Reader::new(bytes);
    let out = huffman_decode_from(&mut r, alphabet_bits)?;
    if r.remaining() != 0 {
        return Err(CodecError::TrailingBytes(r.remaining()));
    }
    Ok(out)
}
