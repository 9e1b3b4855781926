//! Configs shipped with the binary, addressable by name.

pub const BUNDLED: [(&str, &str); 6] = [
    (
        "regime_default",
        include_str!("../configs/regime_default.toml"),
    ),
    ("figure1", include_str!("../configs/figure1.toml")),
    (
        "exchangeable_uniform",
        include_str!("../configs/exchangeable_uniform.toml"),
    ),
    (
        "submartingale_limit",
        include_str!("../configs/submartingale_limit.toml"),
    ),
    ("sv_square", include_str!("../configs/sv_square.toml")),
    (
        "iid_concentration",
        include_str!("../configs/iid_concentration.toml"),
    ),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}
