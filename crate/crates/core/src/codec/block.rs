use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The transmitted message for one block: one codeword index per sample and,
/// for the pilot-shift codec, the index of the encoder-side hypothesis.
///
/// Binary layout: `u32` block length, `u8` bits per index, the indices packed
/// most significant bit first (zero padded to a whole byte), then the `u32`
/// header if present. All integers are big-endian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedBlock {
    pub n: u32,
    pub bits_per_index: u8,
    pub indices: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<u32>,
}

impl EncodedBlock {
    fn payload_len(n: u32, bits: u8) -> usize {
        (n as usize * bits as usize).div_ceil(8)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let bits = self.bits_per_index as usize;
        let mut out = Vec::with_capacity(5 + Self::payload_len(self.n, self.bits_per_index) + 4);
        out.extend_from_slice(&self.n.to_be_bytes());
        out.push(self.bits_per_index);
        let mut acc: u64 = 0;
        let mut filled = 0usize;
        for &ix in &self.indices {
            acc = (acc << bits) | ix as u64;
            filled += bits;
            while filled >= 8 {
                filled -= 8;
                out.push((acc >> filled) as u8);
            }
            acc &= (1u64 << filled) - 1;
        }
        if filled > 0 {
            out.push((acc << (8 - filled)) as u8);
        }
        if let Some(h) = self.header {
            out.extend_from_slice(&h.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 5 {
            return Err(Error::validation("encoded block shorter than its 5-byte prefix"));
        }
        let n = u32::from_be_bytes(bytes[0..4].try_into().expect("4 bytes"));
        let bits_per_index = bytes[4];
        if bits_per_index > 32 {
            return Err(Error::validation(format!("{bits_per_index} bits per index is more than 32")));
        }
        let plen = Self::payload_len(n, bits_per_index);
        let rest = &bytes[5..];
        let header = match rest.len().checked_sub(plen) {
            Some(0) => None,
            Some(4) => Some(u32::from_be_bytes(rest[plen..].try_into().expect("4 bytes"))),
            _ => {
                return Err(Error::validation(format!(
                    "block of {n} indices at {bits_per_index} bits needs {plen} payload bytes \
                     (+4 for a header), found {}",
                    rest.len()
                )))
            }
        };
        let bits = bits_per_index as usize;
        let mut indices = Vec::with_capacity(n as usize);
        let mut acc: u64 = 0;
        let mut filled = 0usize;
        let mut bytes_iter = rest[..plen].iter();
        for _ in 0..n {
            while filled < bits {
                acc = (acc << 8) | *bytes_iter.next().expect("payload length checked") as u64;
                filled += 8;
            }
            filled -= bits;
            indices.push(((acc >> filled) & ((1u64 << bits) - 1)) as u32);
            acc &= (1u64 << filled) - 1;
        }
        Ok(EncodedBlock {
            n,
            bits_per_index,
            indices,
            header,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_msb_first() {
        let b = EncodedBlock {
            n: 3,
            bits_per_index: 3,
            indices: vec![5, 0, 7],
            header: None,
        };
        // 101 000 111 -> 1010_0011 1000_0000
        assert_eq!(b.to_bytes(), vec![0, 0, 0, 3, 3, 0b1010_0011, 0b1000_0000]);
        assert_eq!(EncodedBlock::from_bytes(&b.to_bytes()).unwrap(), b);
    }

    #[test]
    fn header_and_zero_bit_blocks() {
        let b = EncodedBlock {
            n: 4,
            bits_per_index: 0,
            indices: vec![0; 4],
            header: Some(0xDEAD_BEEF),
        };
        let bytes = b.to_bytes();
        assert_eq!(bytes, vec![0, 0, 0, 4, 0, 0xDE, 0xAD, 0xBE, 0xEF]);
        assert_eq!(EncodedBlock::from_bytes(&bytes).unwrap(), b);
    }

    #[test]
    fn truncated_input_rejected() {
        assert!(EncodedBlock::from_bytes(&[0, 0, 0, 9, 4, 1]).is_err());
        assert!(EncodedBlock::from_bytes(&[0, 0]).is_err());
    }
}
