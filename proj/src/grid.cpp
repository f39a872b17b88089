#include "echonav/grid.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace echonav {

using json = nlohmann::json;

const char* heading_name(Heading h) {
    switch (h) {
        case Heading::North: return "north";
        case Heading::East: return "east";
        case Heading::South: return "south";
        case Heading::West: return "west";
    }
    return "?";
}

const char* action_name(Action a) {
    switch (a) {
        case Action::MoveForward: return "move_forward";
        case Action::TurnLeft: return "turn_left";
        case Action::TurnRight: return "turn_right";
        case Action::Stop: return "stop";
    }
    return "?";
}

Cell heading_delta(Heading h) {
    switch (h) {
        case Heading::North: return {0, -1};
        case Heading::East: return {1, 0};
        case Heading::South: return {0, 1};
        case Heading::West: return {-1, 0};
    }
    return {0, 0};
}

int GridScene::walkable_count() const {
    int n = 0;
    for (uint8_t o : occupancy) n += (o == 0);
    return n;
}

namespace {

// Flood fill from `seed`; returns number of reached walkable cells.
int reachable_count(const GridScene& s, Cell seed) {
    std::vector<uint8_t> seen(static_cast<size_t>(s.width) * s.height, 0);
    std::deque<Cell> q{seed};
    seen[static_cast<size_t>(seed.y) * s.width + seed.x] = 1;
    int n = 0;
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        ++n;
        for (int h = 0; h < 4; ++h) {
            Cell d = heading_delta(static_cast<Heading>(h));
            Cell nc{c.x + d.x, c.y + d.y};
            if (!s.walkable(nc)) continue;
            uint8_t& mark = seen[static_cast<size_t>(nc.y) * s.width + nc.x];
            if (!mark) {
                mark = 1;
                q.push_back(nc);
            }
        }
    }
    return n;
}

// BFS distances (in hops) from `to` over walkable cells; -1 = unreachable.
std::vector<int> hop_field(const GridScene& s, Cell to) {
    std::vector<int> dist(static_cast<size_t>(s.width) * s.height, -1);
    std::deque<Cell> q{to};
    dist[static_cast<size_t>(to.y) * s.width + to.x] = 0;
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        int dc = dist[static_cast<size_t>(c.y) * s.width + c.x];
        for (int h = 0; h < 4; ++h) {
            Cell d = heading_delta(static_cast<Heading>(h));
            Cell nc{c.x + d.x, c.y + d.y};
            if (!s.walkable(nc)) continue;
            int& dn = dist[static_cast<size_t>(nc.y) * s.width + nc.x];
            if (dn < 0) {
                dn = dc + 1;
                q.push_back(nc);
            }
        }
    }
    return dist;
}

} // namespace

void GridScene::validate() const {
    if (width < 3 || height < 3)
        throw std::runtime_error("scene '" + id + "': width and height must be >= 3");
    if (occupancy.size() != static_cast<size_t>(width) * height)
        throw std::runtime_error("scene '" + id + "': occupancy size does not match width*height");
    if (cell_size <= 0.0)
        throw std::runtime_error("scene '" + id + "': cell_size must be positive");
    if (reverb_coeff < 0.0 || reverb_coeff >= 1.0)
        throw std::runtime_error("scene '" + id + "': reverb_coeff must be in [0, 1)");
    if (!walkable(source_cell))
        throw std::runtime_error("scene '" + id + "': source_cell is not walkable");
    if (reachable_count(*this, source_cell) != walkable_count())
        throw std::runtime_error("scene '" + id + "': walkable cells are not connected");
}

AgentPose step(const GridScene& scene, const AgentPose& pose, Action action) {
    AgentPose out = pose;
    switch (action) {
        case Action::MoveForward: {
            Cell d = heading_delta(pose.heading);
            Cell target{pose.cell.x + d.x, pose.cell.y + d.y};
            if (scene.walkable(target)) out.cell = target;
            break;
        }
        case Action::TurnLeft:
            out.heading = static_cast<Heading>((static_cast<int>(pose.heading) + 3) % 4);
            break;
        case Action::TurnRight:
            out.heading = static_cast<Heading>((static_cast<int>(pose.heading) + 1) % 4);
            break;
        case Action::Stop:
            break;
    }
    return out;
}

GeodesicResult geodesic(const GridScene& scene, Cell from, Cell to) {
    if (!scene.walkable(from) || !scene.walkable(to))
        throw std::runtime_error("geodesic: both cells must be walkable");
    if (from == to) return {0.0, 0, std::nullopt};

    std::vector<int> dist = hop_field(scene, to);
    int d = dist[static_cast<size_t>(from.y) * scene.width + from.x];
    if (d < 0) throw std::runtime_error("disconnected");

    // First hop of the lex-smallest shortest path: smallest direction that
    // strictly decreases the hop count.
    for (int h = 0; h < 4; ++h) {
        Cell dd = heading_delta(static_cast<Heading>(h));
        Cell nc{from.x + dd.x, from.y + dd.y};
        if (!scene.walkable(nc)) continue;
        if (dist[static_cast<size_t>(nc.y) * scene.width + nc.x] == d - 1)
            return {scene.cell_size * d, d, static_cast<Heading>(h)};
    }
    throw std::runtime_error("geodesic: internal inconsistency");
}

Action oracle_action(const GridScene& scene, const AgentPose& pose, Cell goal) {
    if (pose.cell == goal) return Action::Stop;
    GeodesicResult geo = geodesic(scene, pose.cell, goal);
    int target = static_cast<int>(*geo.first_step);
    int diff = (target - static_cast<int>(pose.heading) + 4) % 4;
    switch (diff) {
        case 0: return Action::MoveForward;
        case 1: return Action::TurnRight;
        case 2: return Action::TurnLeft;  // 180-degree tie: prefer TurnLeft
        default: return Action::TurnLeft;
    }
}

Episode sample_episode(const GridScene& scene, const std::vector<int64_t>& sound_classes,
                       Rng& rng, int max_steps) {
    if (sound_classes.empty())
        throw std::runtime_error("sample_episode: empty sound class set");
    std::vector<Cell> starts;
    starts.reserve(scene.occupancy.size());
    for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x) {
            Cell c{x, y};
            if (scene.walkable(c) && !(c == scene.source_cell)) starts.push_back(c);
        }
    if (starts.empty())
        throw std::runtime_error("sample_episode: no walkable non-source cell");

    Episode ep;
    ep.scene_id = scene.id;
    ep.start_pose.cell = starts[rng.uniform_int(static_cast<int64_t>(starts.size()))];
    ep.start_pose.heading = static_cast<Heading>(rng.uniform_int(4));
    ep.sound_class_id = sound_classes[rng.uniform_int(static_cast<int64_t>(sound_classes.size()))];
    ep.max_steps = max_steps;

    GeodesicResult geo = geodesic(scene, ep.start_pose.cell, scene.source_cell);
    if (geo.hops > max_steps)
        throw std::runtime_error("sample_episode: max_steps below geodesic hop count");
    return ep;
}

GridScene generate_scene(const std::string& id, int width, int height, double cell_size,
                         double obstacle_fraction, double reverb_coeff, Rng& rng) {
    if (width < 3 || height < 3)
        throw std::runtime_error("generate_scene: width and height must be >= 3");
    for (int attempt = 0; attempt < 1000; ++attempt) {
        GridScene s;
        s.id = id;
        s.width = width;
        s.height = height;
        s.cell_size = cell_size;
        s.reverb_coeff = reverb_coeff;
        s.occupancy.assign(static_cast<size_t>(width) * height, 0);
        for (auto& o : s.occupancy) o = rng.uniform01() < obstacle_fraction ? 1 : 0;

        std::vector<Cell> walk;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                if (s.walkable({x, y})) walk.push_back({x, y});
        if (walk.size() < 2) continue;
        s.source_cell = walk[rng.uniform_int(static_cast<int64_t>(walk.size()))];
        if (reachable_count(s, s.source_cell) != static_cast<int>(walk.size())) continue;
        return s;
    }
    throw std::runtime_error("generate_scene: no connected layout found for '" + id + "'");
}

GridScene mirror_scene(const GridScene& scene) {
    GridScene m = scene;
    for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x)
            m.occupancy[static_cast<size_t>(y) * scene.width + (scene.width - 1 - x)] =
                scene.occupancy[static_cast<size_t>(y) * scene.width + x];
    m.source_cell = {scene.width - 1 - scene.source_cell.x, scene.source_cell.y};
    return m;
}

AgentPose mirror_pose(const AgentPose& pose, int width) {
    AgentPose m = pose;
    m.cell.x = width - 1 - pose.cell.x;
    if (pose.heading == Heading::East) m.heading = Heading::West;
    else if (pose.heading == Heading::West) m.heading = Heading::East;
    return m;
}

GridScene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scene: cannot open '" + path + "'");
    json j;
    in >> j;

    GridScene s;
    s.id = j.at("id").get<std::string>();
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.cell_size = j.value("cell_size", 1.0);
    s.reverb_coeff = j.at("reverb_coeff").get<double>();
    const auto& rows = j.at("occupancy");
    if (static_cast<int>(rows.size()) != s.height)
        throw std::runtime_error("load_scene: occupancy row count != height");
    s.occupancy.assign(static_cast<size_t>(s.width) * s.height, 0);
    for (int y = 0; y < s.height; ++y) {
        std::string row = rows[y].get<std::string>();
        if (static_cast<int>(row.size()) != s.width)
            throw std::runtime_error("load_scene: occupancy row length != width");
        for (int x = 0; x < s.width; ++x) {
            if (row[x] != '0' && row[x] != '1')
                throw std::runtime_error("load_scene: occupancy rows must contain only 0/1");
            s.occupancy[static_cast<size_t>(y) * s.width + x] = row[x] == '1';
        }
    }
    s.source_cell = {j.at("source_cell")[0].get<int>(), j.at("source_cell")[1].get<int>()};
    s.validate();
    return s;
}

void save_scene(const GridScene& scene, const std::string& path) {
    json j;
    j["id"] = scene.id;
    j["width"] = scene.width;
    j["height"] = scene.height;
    j["cell_size"] = scene.cell_size;
    j["reverb_coeff"] = scene.reverb_coeff;
    std::vector<std::string> rows;
    for (int y = 0; y < scene.height; ++y) {
        std::string row(scene.width, '0');
        for (int x = 0; x < scene.width; ++x)
            if (scene.occupancy[static_cast<size_t>(y) * scene.width + x]) row[x] = '1';
        rows.push_back(row);
    }
    j["occupancy"] = rows;
    j["source_cell"] = {scene.source_cell.x, scene.source_cell.y};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scene: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

} // namespace echonav
