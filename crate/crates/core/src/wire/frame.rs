//! Length-prefixed frames: 4-byte big-endian length (payload + 1), one
//! type byte, then the payload.

use std::io::{ErrorKind, Read, Write};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    UploadDb = 0x01,
    Query = 0x02,
    Response = 0x03,
    Error = 0x04,
    Params = 0x05,
}

impl TryFrom<u8> for MsgType {
    type Error = Error;

    fn try_from(b: u8) -> Result<Self> {
        Ok(match b {
            0x01 => Self::UploadDb,
            0x02 => Self::Query,
            0x03 => Self::Response,
            0x04 => Self::Error,
            0x05 => Self::Params,
            other => return Err(Error::UnknownMessage(other)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: MsgType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(msg_type: MsgType, payload: Vec<u8>) -> Self {
        Self { msg_type, payload }
    }

    /// ERROR frame carrying a UTF-8 code such as `param-mismatch`.
    pub fn error(code: &str) -> Self {
        Self::new(MsgType::Error, code.as_bytes().to_vec())
    }

    pub fn error_code(&self) -> Option<String> {
        (self.msg_type == MsgType::Error).then(|| String::from_utf8_lossy(&self.payload).into_owned())
    }

    pub fn encode(&self) -> Vec<u8> {
        let len = u32::try_from(self.payload.len() + 1).expect("frame below 4 GiB");
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.extend(len.to_be_bytes());
        out.push(self.msg_type as u8);
        out.extend(&self.payload);
        out
    }

    /// Decodes one complete frame from the front of `bytes`, returning it
    /// with the number of bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(Self, usize)> {
        if bytes.len() < 4 {
            return Err(Error::Truncated {
                needed: 4,
                have: bytes.len(),
            });
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
        if len == 0 {
            return Err(Error::Format("frame length 0 leaves no type byte".into()));
        }
        if bytes.len() < 4 + len {
            return Err(Error::Truncated {
                needed: 4 + len,
                have: bytes.len(),
            });
        }
        let msg_type = MsgType::try_from(bytes[4])?;
        Ok((Self::new(msg_type, bytes[5..4 + len].to_vec()), 4 + len))
    }
}

/// A frame as read from a stream, before its type byte is interpreted.
#[derive(Debug)]
pub struct RawFrame {
    pub type_byte: u8,
    pub payload: Vec<u8>,
}

impl RawFrame {
    pub fn into_frame(self) -> Result<Frame> {
        Ok(Frame::new(MsgType::try_from(self.type_byte)?, self.payload))
    }
}

/// Reads one frame. `Ok(None)` on a clean end of stream before any byte.
/// Frames whose length field exceeds `max_frame` are refused before the
/// payload is read.
pub fn read_frame<R: Read>(r: &mut R, max_frame: usize) -> Result<Option<RawFrame>> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(Error::Truncated { needed: 4, have: got }),
            Ok(k) => got += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(len) as usize;
    if len == 0 {
        return Err(Error::Format("frame length 0 leaves no type byte".into()));
    }
    if len > max_frame {
        return Err(Error::FrameTooLarge {
            size: len,
            cap: max_frame,
        });
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            Error::Truncated {
                needed: len,
                have: 0,
            }
        } else {
            e.into()
        }
    })?;
    let payload = body.split_off(1);
    Ok(Some(RawFrame {
        type_byte: body[0],
        payload,
    }))
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> Result<()> {
    w.write_all(&frame.encode())?;
    w.flush()?;
    Ok(())
}
