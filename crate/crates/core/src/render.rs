//! The in-text HTML view, the words-as-pixels raster and the geometry that
//! links them.
//!
//! Pixel layout: modeled token `t` (corpus order) sits in column `t / H`, row
//! `t % H`, drawn as an `s × s` square. Columns run top to bottom, left to
//! right.

use std::fmt::Write as _;
use std::io::Cursor;
use std::ops::Range;

use image::{ImageFormat, RgbImage};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, TokenIndex};
use crate::encoding::Color;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PixelLayout {
    pub column_height: usize,
    pub pixel_size: usize,
    pub token_count: usize,
}

impl PixelLayout {
    pub fn columns(&self) -> usize {
        self.token_count.div_ceil(self.column_height)
    }

    pub fn width(&self) -> usize {
        self.columns() * self.pixel_size
    }

    pub fn height(&self) -> usize {
        self.column_height * self.pixel_size
    }

    /// `(column, row)` of token `t`.
    pub fn cell(&self, t: usize) -> (usize, usize) {
        (t / self.column_height, t % self.column_height)
    }

    /// Top-left device pixel of token `t`'s square.
    pub fn origin(&self, t: usize) -> (usize, usize) {
        let (col, row) = self.cell(t);
        (col * self.pixel_size, row * self.pixel_size)
    }

    pub fn center(&self, t: usize) -> (usize, usize) {
        let (x, y) = self.origin(t);
        (x + self.pixel_size / 2, y + self.pixel_size / 2)
    }
}

pub fn layout_pixels(token_count: usize, column_height: usize, pixel_size: usize) -> Result<PixelLayout> {
    if column_height < 1 || pixel_size < 1 {
        return Err(Error::InvalidConfig(
            "column height and pixel size must be >= 1".into(),
        ));
    }
    Ok(PixelLayout {
        column_height,
        pixel_size,
        token_count,
    })
}

/// Token under device pixel `(x, y)`, if any.
pub fn hit_test(layout: &PixelLayout, x: i64, y: i64) -> Option<usize> {
    if x < 0 || y < 0 {
        return None;
    }
    let (x, y) = (x as usize, y as usize);
    if x >= layout.width() || y >= layout.height() {
        return None;
    }
    let t = (x / layout.pixel_size) * layout.column_height + y / layout.pixel_size;
    (t < layout.token_count).then_some(t)
}

/// Every `stride`-th color, for a downsampled overview.
pub fn stride_sample(colors: &[Color], stride: usize) -> Vec<Color> {
    colors.iter().step_by(stride.max(1)).copied().collect()
}

/// Fill each token's square with its color; padding cells stay white. With
/// `doc_starts`, the top pixel row of each document's first square is black.
pub fn render_pixels(
    layout: &PixelLayout,
    colors: &[Color],
    doc_starts: Option<&[bool]>,
) -> Result<RgbImage> {
    if colors.len() != layout.token_count {
        return Err(Error::LengthMismatch {
            expected: layout.token_count,
            actual: colors.len(),
        });
    }
    if let Some(flags) = doc_starts {
        if flags.len() != colors.len() {
            return Err(Error::LengthMismatch {
                expected: colors.len(),
                actual: flags.len(),
            });
        }
    }
    let mut image = RgbImage::from_pixel(
        layout.width() as u32,
        layout.height() as u32,
        image::Rgb(Color::WHITE.to_rgb()),
    );
    let s = layout.pixel_size;
    for (t, color) in colors.iter().enumerate() {
        let (x0, y0) = layout.origin(t);
        let separator = doc_starts.is_some_and(|f| f[t]);
        for dy in 0..s {
            let rgb = if separator && dy == 0 {
                Color::BLACK.to_rgb()
            } else {
                color.to_rgb()
            };
            for dx in 0..s {
                image.put_pixel((x0 + dx) as u32, (y0 + dy) as u32, image::Rgb(rgb));
            }
        }
    }
    Ok(image)
}

/// 8-bit RGB PNG bytes.
pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    image.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderMode {
    #[default]
    Background,
    Foreground,
}

impl RenderMode {
    fn property(self) -> &'static str {
        match self {
            RenderMode::Background => "background-color",
            RenderMode::Foreground => "color",
        }
    }
}

pub fn escape_html(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
}

/// Annotated HTML for a whole document. `colors[i]` is `None` for tokens
/// outside the model; those are emitted without a style.
pub fn render_intext(doc: &Document, colors: &[Option<Color>], mode: RenderMode) -> Result<String> {
    render_span(doc, colors, mode, 0..doc.len(), None)
}

fn render_span(
    doc: &Document,
    colors: &[Option<Color>],
    mode: RenderMode,
    tokens: Range<usize>,
    focus: Option<usize>,
) -> Result<String> {
    if colors.len() != doc.len() {
        return Err(Error::LengthMismatch {
            expected: doc.len(),
            actual: colors.len(),
        });
    }
    let offsets = doc.byte_offsets();
    let text = |a: usize, b: usize| &doc.source_text[offsets[a]..offsets[b]];
    let whole = tokens.start == 0 && tokens.end == doc.len();

    let mut html = String::from("<div class=\"doc\" data-doc=\"");
    escape_html(&doc.id, &mut html);
    html.push_str("\">");

    let mut cursor = match (whole, doc.tokens.get(tokens.start)) {
        (true, _) | (false, None) => 0,
        (false, Some(tok)) => tok.char_start,
    };
    for i in tokens.clone() {
        let tok = &doc.tokens[i];
        escape_html(text(cursor, tok.char_start), &mut html);
        let class = if focus == Some(i) { "tok focus" } else { "tok" };
        write!(html, "<span class=\"{class}\" data-t=\"{i}\"").unwrap();
        if let Some(color) = colors[i] {
            write!(html, " style=\"{}:{}\"", mode.property(), color.hex()).unwrap();
        }
        html.push('>');
        escape_html(text(tok.char_start, tok.char_end), &mut html);
        html.push_str("</span>");
        cursor = tok.char_end;
    }
    if whole {
        escape_html(text(cursor, offsets.len() - 1), &mut html);
    }
    html.push_str("</div>");
    Ok(html)
}

/// A rendered passage around one modeled token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Passage {
    pub doc_id: String,
    #[serde(skip)]
    pub doc_index: usize,
    /// Position of the focus token within its document.
    pub position: usize,
    /// Document token positions included in the passage.
    pub token_range: Range<usize>,
    pub html: String,
}

/// Resolve modeled-token index `t` (as laid out by `index`) to its document
/// and render the surrounding text with the token marked `focus`. `window = 0`
/// renders the whole document, otherwise `window` tokens either side.
pub fn passage_for_token(
    corpus: &Corpus,
    index: &TokenIndex,
    colors: &[Vec<Option<Color>>],
    t: usize,
    window: usize,
    mode: RenderMode,
) -> Result<Passage> {
    let (d, pos) = index.locate(t).ok_or(Error::OutOfRange {
        index: t,
        len: index.len(),
    })?;
    let doc = &corpus.documents()[d];
    let doc_colors = colors.get(d).ok_or(Error::LengthMismatch {
        expected: corpus.len(),
        actual: colors.len(),
    })?;
    let token_range = if window == 0 {
        0..doc.len()
    } else {
        pos.saturating_sub(window)..(pos + window + 1).min(doc.len())
    };
    let html = render_span(doc, doc_colors, mode, token_range.clone(), Some(pos))?;
    Ok(Passage {
        doc_id: doc.id.clone(),
        doc_index: d,
        position: pos,
        token_range,
        html,
    })
}
