//! Label colors for `labels.ppm`.

/// The 256-entry PASCAL VOC color map: label bits are spread over the
/// channels, most significant color bit first.
pub const PALETTE: [[u8; 3]; 256] = build();

const fn build() -> [[u8; 3]; 256] {
    let mut table = [[0u8; 3]; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i;
        let mut rgb = [0u8; 3];
        let mut j = 0;
        while j < 8 {
            rgb[0] |= ((c & 1) as u8) << (7 - j);
            rgb[1] |= (((c >> 1) & 1) as u8) << (7 - j);
            rgb[2] |= (((c >> 2) & 1) as u8) << (7 - j);
            c >>= 3;
            j += 1;
        }
        table[i] = rgb;
        i += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_entries() {
        assert_eq!(PALETTE[0], [0, 0, 0]);
        assert_eq!(PALETTE[1], [128, 0, 0]);
        assert_eq!(PALETTE[2], [0, 128, 0]);
        assert_eq!(PALETTE[15], [192, 128, 128]);
    }
}
