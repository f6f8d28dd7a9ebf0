#include "tmm/layout.hpp"

#include "tmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tmm {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

Cell parse_cell(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("layout: malformed cell '" + s + "'");
    try {
        return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ConfigError("layout: malformed cell '" + s + "'");
    }
}

Tile tile_from_char(char ch) {
    switch (ch) {
        case '.': return Tile::Floor;
        case 'X': return Tile::Counter;
        case 'P': return Tile::Pot;
        case 'S': return Tile::ServingStation;
        default: break;
    }
    throw ConfigError(std::string("layout: unknown tile character '") + ch + "'");
}

SpawnPose parse_spawn(const std::string& value) {
    std::istringstream in(value);
    std::string cell, facing;
    in >> cell >> facing;
    const auto f = parse_facing(facing);
    if (!f) throw ConfigError("layout: malformed spawn '" + value + "'");
    return {parse_cell(cell), *f};
}

}  // namespace

char tile_char(Tile t) {
    switch (t) {
        case Tile::Floor: return '.';
        case Tile::Counter: return 'X';
        case Tile::Pot: return 'P';
        case Tile::ServingStation: return 'S';
    }
    return '?';
}

std::vector<Cell> Layout::cells_of(Tile t) const {
    std::vector<Cell> out;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (tile({x, y}) == t) out.push_back({x, y});
    return out;
}

std::vector<Cell> Layout::all_cells() const {
    std::vector<Cell> out;
    out.reserve(tiles.size());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out.push_back({x, y});
    return out;
}

double Layout::diagonal() const { return std::hypot(width, height); }

int Layout::initial_count(ItemClass c) const {
    return static_cast<int>(std::count_if(initial_items.begin(), initial_items.end(),
                                          [c](const ItemPlacement& p) { return p.cls == c; }));
}

int Layout::initial_ingredients() const {
    return initial_count(ItemClass::Onion) + initial_count(ItemClass::Tomato);
}

void validate(const Layout& layout) {
    if (layout.width <= 0 || layout.height <= 0)
        throw ConfigError("layout '" + layout.name + "': empty grid");
    if (layout.tiles.size() != static_cast<std::size_t>(layout.width * layout.height))
        throw ConfigError("layout '" + layout.name + "': tile count does not match width x height");
    if (layout.cells_of(Tile::Pot).empty())
        throw ConfigError("layout '" + layout.name + "': at least one Pot tile is required");
    if (layout.cells_of(Tile::ServingStation).empty())
        throw ConfigError("layout '" + layout.name +
                          "': at least one ServingStation tile is required");

    std::set<Cell> occupied;
    for (const auto& item : layout.initial_items) {
        if (!layout.in_bounds(item.cell))
            throw ConfigError("layout '" + layout.name + "': item at " + to_string(item.cell) +
                              " is outside the grid");
        if (layout.tile(item.cell) != Tile::Counter)
            throw ConfigError("layout '" + layout.name + "': item at " + to_string(item.cell) +
                              " is not on a Counter tile");
        if (item.cls == ItemClass::Soup)
            throw ConfigError("layout '" + layout.name + "': soups cannot be placed initially");
        if (!occupied.insert(item.cell).second)
            throw ConfigError("layout '" + layout.name + "': two initial items share cell " +
                              to_string(item.cell));
    }

    for (AgentId a : kAgents) {
        const Cell c = layout.spawns[index_of(a)].cell;
        if (!layout.in_bounds(c))
            throw ConfigError("layout '" + layout.name + "': " + to_string(a) +
                              " spawn is outside the grid");
        if (layout.tile(c) != Tile::Floor)
            throw ConfigError("layout '" + layout.name + "': " + to_string(a) +
                              " spawn is not a Floor tile");
    }
    if (layout.spawns[0].cell == layout.spawns[1].cell)
        throw ConfigError("layout '" + layout.name + "': spawn cells must be distinct");
}

Layout parse_layout(std::string_view text) {
    Layout layout;
    std::istringstream in{std::string(text)};
    std::string line;
    bool in_grid = false;
    bool have_spawn[2] = {false, false};
    std::vector<std::string> rows;

    while (std::getline(in, line)) {
        if (!in_grid) {
            const std::string t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            if (t == "---") {
                in_grid = true;
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError("layout: malformed header line '" + t + "'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key == "name") {
                layout.name = value;
            } else if (key == "human" || key == "robot") {
                const AgentId a = *parse_agent(key);
                layout.spawns[index_of(a)] = parse_spawn(value);
                have_spawn[index_of(a)] = true;
            } else if (key == "item") {
                std::istringstream iv(value);
                std::string cls, cell;
                iv >> cls >> cell;
                const auto c = parse_item_class(cls);
                if (!c) throw ConfigError("layout: unknown item class '" + cls + "'");
                layout.initial_items.push_back({*c, parse_cell(cell)});
            } else {
                throw ConfigError("layout: unknown header key '" + key + "'");
            }
        } else {
            const std::string t = trim(line);
            if (t.empty()) continue;
            rows.push_back(t);
        }
    }

    if (!have_spawn[0] || !have_spawn[1]) throw ConfigError("layout: both spawn poses are required");
    if (rows.empty()) throw ConfigError("layout: missing grid");
    layout.height = static_cast<int>(rows.size());
    layout.width = static_cast<int>(rows.front().size());
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != layout.width)
            throw ConfigError("layout: grid rows have unequal widths");
        for (char ch : r) layout.tiles.push_back(tile_from_char(ch));
    }
    validate(layout);
    return layout;
}

std::string format_layout(const Layout& layout) {
    std::ostringstream out;
    out << "name = " << layout.name << '\n';
    for (AgentId a : kAgents) {
        const auto& s = layout.spawns[index_of(a)];
        out << to_string(a) << " = " << to_string(s.cell) << ' ' << to_string(s.facing) << '\n';
    }
    for (const auto& item : layout.initial_items)
        out << "item = " << to_string(item.cls) << ' ' << to_string(item.cell) << '\n';
    out << "---\n";
    for (int y = 0; y < layout.height; ++y) {
        for (int x = 0; x < layout.width; ++x) out << tile_char(layout.tile({x, y}));
        out << '\n';
    }
    return out.str();
}

Layout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("layout: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_layout(buf.str());
}

std::vector<Layout> load_layout_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".layout") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Layout> out;
    for (const auto& f : files) out.push_back(load_layout(f));
    return out;
}

nlohmann::json layout_to_json(const Layout& layout) {
    nlohmann::json rows = nlohmann::json::array();
    for (int y = 0; y < layout.height; ++y) {
        std::string row;
        for (int x = 0; x < layout.width; ++x) row.push_back(tile_char(layout.tile({x, y})));
        rows.push_back(row);
    }
    nlohmann::json items = nlohmann::json::array();
    for (const auto& i : layout.initial_items) items.push_back({to_string(i.cls), i.cell.x, i.cell.y});
    nlohmann::json spawns = nlohmann::json::object();
    for (AgentId a : kAgents) {
        const auto& s = layout.spawns[index_of(a)];
        spawns[to_string(a)] = {s.cell.x, s.cell.y, to_string(s.facing)};
    }
    return {{"name", layout.name}, {"grid", rows}, {"items", items}, {"spawns", spawns}};
}

Layout layout_from_json(const nlohmann::json& j) {
    try {
        Layout layout;
        layout.name = j.at("name").get<std::string>();
        const auto& rows = j.at("grid");
        layout.height = static_cast<int>(rows.size());
        layout.width = layout.height ? static_cast<int>(rows.at(0).get<std::string>().size()) : 0;
        for (const auto& r : rows) {
            const auto s = r.get<std::string>();
            if (static_cast<int>(s.size()) != layout.width) throw ConfigError("layout: ragged grid");
            for (char ch : s) layout.tiles.push_back(tile_from_char(ch));
        }
        for (const auto& i : j.at("items")) {
            const auto c = parse_item_class(i.at(0).get<std::string>());
            if (!c) throw ConfigError("layout: unknown item class");
            layout.initial_items.push_back({*c, {i.at(1).get<int>(), i.at(2).get<int>()}});
        }
        for (AgentId a : kAgents) {
            const auto& s = j.at("spawns").at(to_string(a));
            const auto f = parse_facing(s.at(2).get<std::string>());
            if (!f) throw ConfigError("layout: bad spawn facing");
            layout.spawns[index_of(a)] = {{s.at(0).get<int>(), s.at(1).get<int>()}, *f};
        }
        validate(layout);
        return layout;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("layout: malformed json: ") + e.what());
    }
}

}  // namespace tmm
