//! Flat binary parameter files.
//!
//! ```text
//! magic    8 bytes   "HDQNPARM"
//! version  u32 LE    1
//! kind     u8        0 = table, 1 = network
//! n_sizes  u32 LE
//! sizes    n_sizes × u32 LE
//!            table:   [states, goals, outputs]
//!            network: [states, goals, hidden..., outputs]
//! rate     f64 LE    table step size / network learning rate
//! body     f64 LE    table: values in (state, goal, output) order
//!                    network: per layer, weights (input-major) then biases
//! ```

use std::io::{Read, Write};

use super::{Dense, MlpQ, QFunction, QTable, ValueFunction};
use crate::error::{Error, Result};

pub const MAGIC_PARAMS: &[u8; 8] = b"HDQNPARM";
pub const PARAMS_VERSION: u32 = 1;

const KIND_TABLE: u8 = 0;
const KIND_MLP: u8 = 1;

pub fn write_q_function<W: Write>(out: &mut W, q: &QFunction) -> Result<()> {
    out.write_all(MAGIC_PARAMS)?;
    out.write_all(&PARAMS_VERSION.to_le_bytes())?;
    let (kind, sizes, rate, body): (u8, Vec<usize>, f64, Vec<f64>) = match q {
        QFunction::Tabular(t) => {
            (
                KIND_TABLE,
                vec![t.state_count(), t.goal_count(), t.output_count()],
                t.alpha(),
                t.values().to_vec(),
            )
        }
        QFunction::Mlp(m) => {
            let mut sizes = vec![m.state_count(), m.goal_count()];
            sizes.extend(m.hidden_sizes());
            sizes.push(m.output_count());
            (KIND_MLP, sizes, m.learning_rate(), m.parameters())
        }
    };
    out.write_all(&[kind])?;
    out.write_all(&(sizes.len() as u32).to_le_bytes())?;
    for s in &sizes {
        out.write_all(&(*s as u32).to_le_bytes())?;
    }
    out.write_all(&rate.to_le_bytes())?;
    for v in body {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| read_f64(r)).collect()
}

pub fn read_q_function<R: Read>(input: &mut R) -> Result<QFunction> {
    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))?;
    if &magic != MAGIC_PARAMS {
        return Err(Error::Checkpoint("bad parameter magic".into()));
    }
    let version = read_u32(input)?;
    if version != PARAMS_VERSION {
        return Err(Error::Checkpoint(format!("unsupported parameter version {version}")));
    }
    let mut kind = [0u8; 1];
    input
        .read_exact(&mut kind)
        .map_err(|e| Error::Checkpoint(format!("truncated: {e}")))?;
    let n_sizes = read_u32(input)? as usize;
    if n_sizes > 64 {
        return Err(Error::Checkpoint(format!("implausible layer count {n_sizes}")));
    }
    let sizes = (0..n_sizes)
        .map(|_| read_u32(input).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let rate = read_f64(input)?;
    match kind[0] {
        KIND_TABLE => {
            let [states, goals, outputs] = sizes[..] else {
                return Err(Error::Checkpoint("table header needs three sizes".into()));
            };
            let values = read_f64s(input, states * goals.max(1) * outputs)?;
            Ok(QFunction::Tabular(QTable::from_parts(
                states, goals, outputs, rate, values,
            )))
        }
        KIND_MLP => {
            if sizes.len() < 3 {
                return Err(Error::Checkpoint("network header needs at least three sizes".into()));
            }
            let (states, goals) = (sizes[0], sizes[1]);
            let mut widths = vec![states + goals];
            widths.extend_from_slice(&sizes[2..]);
            let layers = widths
                .windows(2)
                .map(|io| {
                    Ok(Dense {
                        inputs: io[0],
                        outputs: io[1],
                        w: read_f64s(input, io[0] * io[1])?,
                        b: read_f64s(input, io[1])?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(QFunction::Mlp(MlpQ::from_layers(states, goals, rate, layers)))
        }
        other => Err(Error::Checkpoint(format!("unknown parameter kind {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critic::GoalId;
    use crate::env::StateId;
    use crate::rng::RngStream;

    #[test]
    fn table_roundtrip() {
        let mut t = QTable::new(3, 2, 2, 0.25);
        t.set(StateId(2), Some(GoalId(1)), 1, -3.5).unwrap();
        let mut buf = Vec::new();
        write_q_function(&mut buf, &QFunction::Tabular(t.clone())).unwrap();
        assert_eq!(&buf[..8], MAGIC_PARAMS);
        // header: 8 + 4 + 1 + 4 + 3·4 + 8, body: 12 values
        assert_eq!(buf.len(), 37 + 12 * 8);
        let QFunction::Tabular(back) = read_q_function(&mut buf.as_slice()).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(back.values(), t.values());
        assert_eq!(back.alpha(), 0.25);
    }

    #[test]
    fn network_roundtrip() {
        let net = MlpQ::new(5, 3, &[7, 4], 2, 1e-3, &mut RngStream::new(1, 5));
        let mut buf = Vec::new();
        write_q_function(&mut buf, &QFunction::Mlp(net.clone())).unwrap();
        let QFunction::Mlp(back) = read_q_function(&mut buf.as_slice()).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(back.parameters(), net.parameters());
        assert_eq!(back.hidden_sizes(), vec![7, 4]);
        assert_eq!(
            back.evaluate(StateId(4), Some(GoalId(2))).unwrap(),
            net.evaluate(StateId(4), Some(GoalId(2))).unwrap()
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_q_function(&mut &b"NOTMAGIC\x01\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_q_function(&mut buf, &QFunction::Tabular(QTable::new(2, 0, 2, 0.1))).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_q_function(&mut buf.as_slice()).is_err());
    }
}
