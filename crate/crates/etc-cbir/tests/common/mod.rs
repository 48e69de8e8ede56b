#![allow(dead_code)]

use axum::body::Body;
use axum::http::Request;
use etc_cbir::image_io;
use etc_cbir_core::Raster;

pub const BOUNDARY: &str = "etc-cbir-test-boundary";

/// Builds a multipart/form-data body. Fields with a `Some` file name are
/// sent as file parts.
pub fn multipart(parts: &[(&str, Option<&str>, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, file, data) in parts {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        match file {
            Some(f) => body.extend_from_slice(
                format!(
                    "Content-Disposition: form-data; name=\"{name}\"; filename=\"{f}\"\r\nContent-Type: application/octet-stream\r\n\r\n"
                )
                .as_bytes(),
            ),
            None => body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes(),
            ),
        }
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

pub fn post(uri: &str, body: Vec<u8>) -> Request<Body> {
    Request::post(uri)
        .header(
            "content-type",
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(Body::from(body))
        .unwrap()
}

pub fn upload_request(id: &str, owner: &str, png: &[u8]) -> Request<Body> {
    post(
        "/images",
        multipart(&[
            ("image_id", None, id.as_bytes()),
            ("owner_info", None, owner.as_bytes()),
            ("image", Some("x.png"), png),
        ]),
    )
}

pub fn query_request(png: &[u8], k: Option<usize>) -> Request<Body> {
    let k = k.map(|k| k.to_string());
    let mut parts: Vec<(&str, Option<&str>, &[u8])> = vec![("image", Some("q.png"), png)];
    if let Some(k) = &k {
        parts.push(("k", None, k.as_bytes()));
    }
    post("/query", multipart(&parts))
}

pub fn png(r: &Raster) -> Vec<u8> {
    image_io::encode_png(r).unwrap()
}
