//! Front ends for the qrefine engine: the HTTP/WebSocket API and the file-watch server.

pub mod api;
pub mod watch;
