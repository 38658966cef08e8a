//! WebAssembly bindings for the browser demo in `www/`.

pub mod api;

use wasm_bindgen::prelude::*;

fn js(r: ptbreak::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = presetNames)]
pub fn preset_names() -> String {
    api::preset_names()
}

#[wasm_bindgen]
pub fn preset(name: &str) -> Result<String, JsError> {
    js(api::preset(name))
}

#[wasm_bindgen]
pub fn check(family: &str, params: &str) -> Result<String, JsError> {
    js(api::check(family, params))
}

#[wasm_bindgen]
pub fn sweep(family: &str, path: &str, params: &str) -> Result<String, JsError> {
    js(api::sweep(family, path, params))
}

#[wasm_bindgen]
pub fn grid(family: &str, grid: &str, params: &str) -> Result<String, JsError> {
    js(api::grid(family, grid, params))
}
