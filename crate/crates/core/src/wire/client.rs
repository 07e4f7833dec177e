use std::io::{BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};

use super::codec::{decode_params_block, decode_response, encode_query, PublicParams};
use super::frame::{read_frame, write_frame, Frame, MsgType};
use super::max_frame_from_env;
use crate::error::{Error, Result};
use crate::scheme::{QueryMatrix, ResponseMatrix};

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    max_frame: usize,
}

impl Client {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
            max_frame: max_frame_from_env(),
        })
    }

    pub fn with_max_frame(mut self, max_frame: usize) -> Self {
        self.max_frame = max_frame;
        self
    }

    /// Sends one frame and waits for its reply; ERROR replies become
    /// [`Error::Remote`].
    pub fn exchange(&mut self, frame: &Frame) -> Result<Frame> {
        write_frame(&mut self.writer, frame)?;
        let reply = read_frame(&mut self.reader, self.max_frame)?
            .ok_or_else(|| Error::Remote("connection closed".into()))?
            .into_frame()?;
        match reply.error_code() {
            Some(code) => Err(Error::Remote(code)),
            None => Ok(reply),
        }
    }

    /// The server's public parameters.
    pub fn params(&mut self) -> Result<PublicParams> {
        let reply = self.exchange(&Frame::new(MsgType::Params, Vec::new()))?;
        expect(&reply, MsgType::Params)?;
        decode_params_block(&reply.payload)
    }

    pub fn query(&mut self, public: &PublicParams, q: &QueryMatrix) -> Result<ResponseMatrix> {
        let reply = self.exchange(&Frame::new(MsgType::Query, encode_query(public, q)))?;
        expect(&reply, MsgType::Response)?;
        let (theirs, a) = decode_response(&reply.payload)?;
        if !theirs.compatible(public) {
            return Err(Error::Remote("response parameters differ from query".into()));
        }
        Ok(a)
    }
}

fn expect(frame: &Frame, want: MsgType) -> Result<()> {
    if frame.msg_type != want {
        return Err(Error::Format(format!(
            "expected {want:?} reply, got {:?}",
            frame.msg_type
        )));
    }
    Ok(())
}
