//! Text dump format for codebooks.
//!
//! ```text
//! levels=S branching=K elements=N [rf=R]
//! s k re,im re,im ...          one line per codeword
//! RF s b                       MS only, after the codewords of block b
//! re,im ...                    N rows of R entries
//! BB s b
//! re,im ...                    R rows of R entries
//! ```
//!
//! Numbers carry 16 significant digits, so loading a dump and writing it
//! again reproduces the text exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{HybridBlock, MsCodebook, RisCodebook};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

fn fmt_complex(out: &mut String, z: Complex64) {
    let _ = write!(out, "{:.15e},{:.15e}", z.re, z.im);
}

fn codeword_line(level: usize, index: usize, w: &CVector) -> String {
    let mut line = format!("{level} {index}");
    for z in w.iter() {
        line.push(' ');
        fmt_complex(&mut line, *z);
    }
    line
}

fn matrix_rows(m: &CMatrix) -> impl Iterator<Item = String> + '_ {
    m.row_iter().map(|row| {
        let mut line = String::new();
        for (j, z) in row.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            fmt_complex(&mut line, *z);
        }
        line
    })
}

pub fn write_ris_codebook<W: Write>(cb: &RisCodebook, mut out: W) -> Result<()> {
    writeln!(
        out,
        "levels={} branching={} elements={}",
        cb.levels.len(),
        cb.branching,
        cb.num_elements
    )?;
    for (s, level) in cb.levels.iter().enumerate() {
        for (k, w) in level.iter().enumerate() {
            writeln!(out, "{}", codeword_line(s + 1, k + 1, w))?;
        }
    }
    Ok(())
}

pub fn write_ms_codebook<W: Write>(cb: &MsCodebook, mut out: W) -> Result<()> {
    writeln!(
        out,
        "levels={} branching={} elements={} rf={}",
        cb.blocks.len(),
        cb.branching,
        cb.num_elements,
        cb.n_rf
    )?;
    for (s, level) in cb.blocks.iter().enumerate() {
        for (b, block) in level.iter().enumerate() {
            for j in 0..cb.n_rf {
                let w = block.effective.column(j).into_owned();
                writeln!(out, "{}", codeword_line(s + 1, b * cb.n_rf + j + 1, &w))?;
            }
            writeln!(out, "RF {} {}", s + 1, b + 1)?;
            for row in matrix_rows(&block.analog) {
                writeln!(out, "{row}")?;
            }
            writeln!(out, "BB {} {}", s + 1, b + 1)?;
            for row in matrix_rows(&block.digital) {
                writeln!(out, "{row}")?;
            }
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            line_no: 0,
        }
    }

    fn next(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            Some(line) => {
                self.line_no += 1;
                Ok(Some(line?))
            }
            None => Ok(None),
        }
    }

    fn expect(&mut self) -> Result<String> {
        self.next()?.ok_or_else(|| self.err("unexpected end of file"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::CodebookFormat {
            line: self.line_no,
            message: message.into(),
        }
    }
}

struct Header {
    levels: usize,
    branching: usize,
    elements: usize,
    rf: Option<usize>,
}

fn parse_header<R: BufRead>(lines: &mut Lines<R>) -> Result<Header> {
    let text = lines.expect()?;
    let (mut levels, mut branching, mut elements, mut rf) = (None, None, None, None);
    for field in text.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| lines.err(format!("bad header field `{field}`")))?;
        let value: usize = value
            .parse()
            .map_err(|_| lines.err(format!("bad header value `{value}`")))?;
        match key {
            "levels" => levels = Some(value),
            "branching" => branching = Some(value),
            "elements" => elements = Some(value),
            "rf" => rf = Some(value),
            other => return Err(lines.err(format!("unknown header key `{other}`"))),
        }
    }
    match (levels, branching, elements) {
        (Some(levels), Some(branching), Some(elements)) if branching >= 2 && elements >= 1 => Ok(Header {
            levels,
            branching,
            elements,
            rf,
        }),
        _ => Err(lines.err("header needs levels, branching (>= 2) and elements")),
    }
}

fn parse_complex<R: BufRead>(lines: &Lines<R>, token: &str) -> Result<Complex64> {
    let (re, im) = token
        .split_once(',')
        .ok_or_else(|| lines.err(format!("expected `re,im`, got `{token}`")))?;
    let re: f64 = re.parse().map_err(|_| lines.err(format!("bad number `{re}`")))?;
    let im: f64 = im.parse().map_err(|_| lines.err(format!("bad number `{im}`")))?;
    Ok(Complex64::new(re, im))
}

fn parse_codeword<R: BufRead>(lines: &mut Lines<R>, level: usize, index: usize, elements: usize) -> Result<CVector> {
    let text = lines.expect()?;
    let mut tokens = text.split_whitespace();
    let s: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err("missing level index"))?;
    let k: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err("missing codeword index"))?;
    if (s, k) != (level, index) {
        return Err(lines.err(format!("expected codeword {level} {index}, found {s} {k}")));
    }
    let entries = tokens.map(|t| parse_complex(lines, t)).collect::<Result<Vec<_>>>()?;
    if entries.len() != elements {
        return Err(lines.err(format!("codeword has {} entries, expected {elements}", entries.len())));
    }
    Ok(CVector::from_vec(entries))
}

fn parse_matrix<R: BufRead>(
    lines: &mut Lines<R>,
    tag: &str,
    level: usize,
    block: usize,
    rows: usize,
    cols: usize,
) -> Result<CMatrix> {
    let text = lines.expect()?;
    let expected = format!("{tag} {level} {block}");
    if text.trim() != expected {
        return Err(lines.err(format!("expected `{expected}`, found `{}`", text.trim())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let text = lines.expect()?;
        let row = text
            .split_whitespace()
            .map(|t| parse_complex(lines, t))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != cols {
            return Err(lines.err(format!("{tag} row has {} entries, expected {cols}", row.len())));
        }
        data.extend(row);
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

fn expect_end<R: BufRead>(lines: &mut Lines<R>) -> Result<()> {
    while let Some(extra) = lines.next()? {
        if !extra.trim().is_empty() {
            return Err(lines.err("trailing content"));
        }
    }
    Ok(())
}

pub fn read_ris_codebook<R: BufRead>(input: R) -> Result<RisCodebook> {
    let mut lines = Lines::new(input);
    let header = parse_header(&mut lines)?;
    if header.rf.is_some() {
        return Err(lines.err("RIS codebook header must not carry `rf`"));
    }
    let mut levels = Vec::with_capacity(header.levels);
    for s in 1..=header.levels {
        let count = header.branching.pow(s as u32);
        let words = (1..=count)
            .map(|k| parse_codeword(&mut lines, s, k, header.elements))
            .collect::<Result<Vec<_>>>()?;
        levels.push(words);
    }
    expect_end(&mut lines)?;
    Ok(RisCodebook {
        branching: header.branching,
        num_elements: header.elements,
        levels,
    })
}

pub fn read_ms_codebook<R: BufRead>(input: R) -> Result<MsCodebook> {
    let mut lines = Lines::new(input);
    let header = parse_header(&mut lines)?;
    let n_rf = header.rf.ok_or_else(|| lines.err("MS codebook header needs `rf`"))?;
    if n_rf == 0 || header.branching % n_rf != 0 {
        return Err(lines.err("rf must divide the branching factor"));
    }
    let mut blocks = Vec::with_capacity(header.levels);
    let mut levels = Vec::with_capacity(header.levels);
    for s in 1..=header.levels {
        let count = header.branching.pow(s as u32);
        let mut level_blocks = Vec::with_capacity(count / n_rf);
        let mut words = Vec::with_capacity(count);
        for b in 1..=count / n_rf {
            let mut columns = Vec::with_capacity(n_rf);
            for j in 0..n_rf {
                columns.push(parse_codeword(&mut lines, s, (b - 1) * n_rf + j + 1, header.elements)?);
            }
            let analog = parse_matrix(&mut lines, "RF", s, b, header.elements, n_rf)?;
            let digital = parse_matrix(&mut lines, "BB", s, b, n_rf, n_rf)?;
            let effective = CMatrix::from_columns(&columns);
            words.extend(columns);
            level_blocks.push(HybridBlock {
                analog,
                digital,
                effective,
            });
        }
        blocks.push(level_blocks);
        levels.push(words);
    }
    expect_end(&mut lines)?;
    Ok(MsCodebook {
        branching: header.branching,
        num_elements: header.elements,
        n_rf,
        blocks,
        levels,
    })
}
