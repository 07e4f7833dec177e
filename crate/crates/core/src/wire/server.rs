use std::io::{BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use super::codec::{decode_query, encode_params_block, encode_response, PublicParams};
use super::frame::{read_frame, write_frame, Frame, MsgType};
use super::max_frame_from_env;
use crate::error::{Error, Result};
use crate::gf::FieldTower;
use crate::scheme::{server_respond, Database};

#[derive(Clone, Copy, Debug)]
pub struct ServerConfig {
    pub max_frame: usize,
}

impl ServerConfig {
    /// Reads `CBPIR_MAX_FRAME`, falling back to the default cap.
    pub fn from_env() -> Self {
        Self {
            max_frame: max_frame_from_env(),
        }
    }
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            max_frame: super::DEFAULT_MAX_FRAME,
        }
    }
}

struct State {
    db: Database,
    public: PublicParams,
    params_block: Vec<u8>,
}

/// Answers queries against a read-only database, one thread per
/// connection. Query contents are never logged.
pub struct Server {
    listener: TcpListener,
    state: Arc<State>,
    cfg: ServerConfig,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, db: Database, tower: FieldTower, cfg: ServerConfig) -> Result<Self> {
        let public = PublicParams::new(db.params(), &tower);
        let params_block = encode_params_block(&public);
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            state: Arc::new(State {
                db,
                public,
                params_block,
            }),
            cfg,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accept loop; returns only if the listener fails.
    pub fn serve(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) if e.kind() == std::io::ErrorKind::ConnectionAborted => continue,
                Err(e) => return Err(e.into()),
            };
            let state = Arc::clone(&self.state);
            let cfg = self.cfg;
            thread::spawn(move || {
                // a failed connection only affects its own client
                let _ = serve_connection(stream, &state, cfg);
            });
        }
        Ok(())
    }
}

fn serve_connection(stream: TcpStream, state: &State, cfg: ServerConfig) -> Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    loop {
        let raw = match read_frame(&mut reader, cfg.max_frame) {
            Ok(Some(raw)) => raw,
            Ok(None) => return Ok(()),
            Err(Error::FrameTooLarge { .. }) => {
                // the rest of the frame is unread, so the stream cannot resync
                write_frame(&mut writer, &Frame::error("frame-too-large"))?;
                return Ok(());
            }
            Err(Error::Io(e)) => return Err(e.into()),
            Err(_) => {
                write_frame(&mut writer, &Frame::error("malformed"))?;
                return Ok(());
            }
        };
        let reply = match raw.into_frame() {
            Ok(frame) => handle(state, &frame),
            Err(_) => Frame::error("unknown-message"),
        };
        write_frame(&mut writer, &reply)?;
    }
}

fn handle(state: &State, frame: &Frame) -> Frame {
    match frame.msg_type {
        MsgType::Params if frame.payload.is_empty() => {
            Frame::new(MsgType::Params, state.params_block.clone())
        }
        MsgType::Params => Frame::error("malformed"),
        MsgType::Query => answer(state, &frame.payload),
        MsgType::UploadDb => Frame::error("read-only"),
        MsgType::Response | MsgType::Error => Frame::error("unexpected-message"),
    }
}

fn answer(state: &State, payload: &[u8]) -> Frame {
    let (public, query) = match decode_query(payload) {
        Ok(x) => x,
        Err(_) => return Frame::error("malformed"),
    };
    if !public.compatible(&state.public) {
        return Frame::error("param-mismatch");
    }
    match server_respond(&state.db, &query) {
        Ok(a) => Frame::new(MsgType::Response, encode_response(&state.public, &a)),
        Err(_) => Frame::error("malformed"),
    }
}
