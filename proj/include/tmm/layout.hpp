#pragma once

#include "tmm/grid.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmm {

enum class Tile : std::uint8_t { Floor, Counter, Pot, ServingStation };

char tile_char(Tile t);

struct ItemPlacement {
    ItemClass cls = ItemClass::Onion;
    Cell cell;
};

struct SpawnPose {
    Cell cell;
    Facing facing = Facing::N;
};

/// Static kitchen floorplan plus the initial item placement.
struct Layout {
    std::string name;
    int width = 0;
    int height = 0;
    std::vector<Tile> tiles;  // row-major, width * height
    std::vector<ItemPlacement> initial_items;
    std::array<SpawnPose, 2> spawns{};  // indexed by AgentId

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
    Tile tile(Cell c) const { return tiles[static_cast<std::size_t>(c.y * width + c.x)]; }
    bool is_floor(Cell c) const { return in_bounds(c) && tile(c) == Tile::Floor; }
    std::vector<Cell> cells_of(Tile t) const;
    std::vector<Cell> all_cells() const;
    double diagonal() const;
    int initial_count(ItemClass c) const;
    int initial_ingredients() const;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const Layout& layout);

/// Parses the plain-text layout format:
///
///     name = open_kitchen
///     human = 1,1 E
///     robot = 5,3 W
///     item = onion 0,1
///     ---
///     XXPXXXX
///     X.....S
///
/// Grid characters: `.` floor, `X` counter, `P` pot, `S` serving station.
/// The result is validated.
Layout parse_layout(std::string_view text);
std::string format_layout(const Layout& layout);
Layout load_layout(const std::filesystem::path& path);

/// All `*.layout` files in a directory, sorted by file name.
std::vector<Layout> load_layout_dir(const std::filesystem::path& dir);

nlohmann::json layout_to_json(const Layout& layout);
Layout layout_from_json(const nlohmann::json& j);

using LayoutPtr = std::shared_ptr<const Layout>;

}  // namespace tmm
