#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echonav/rng.hpp"

namespace echonav {

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

// Grid convention: x is the column, y is the row. North decreases y,
// South increases y, East increases x, West decreases x.
enum class Heading : int { North = 0, East = 1, South = 2, West = 3 };

enum class Action : int { MoveForward = 0, TurnLeft = 1, TurnRight = 2, Stop = 3 };

constexpr int kNumActions = 4;

const char* heading_name(Heading h);
const char* action_name(Action a);
Cell heading_delta(Heading h);

struct AgentPose {
    Cell cell;
    Heading heading = Heading::North;
    bool operator==(const AgentPose&) const = default;
};

// Occupancy world with a single fixed sound source. `occupancy[y*width+x]`
// is true for blocked cells. Invariants: source walkable, walkable cells
// form one connected component, width/height >= 3.
struct GridScene {
    std::string id;
    int width = 0;
    int height = 0;
    double cell_size = 1.0;
    std::vector<uint8_t> occupancy;
    Cell source_cell;
    double reverb_coeff = 0.5;

    bool in_bounds(Cell c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }
    bool walkable(Cell c) const {
        return in_bounds(c) && occupancy[static_cast<size_t>(c.y) * width + c.x] == 0;
    }
    int walkable_count() const;

    // Throws std::runtime_error naming the violated invariant.
    void validate() const;
};

struct Episode {
    std::string scene_id;
    AgentPose start_pose;
    int64_t sound_class_id = 0;
    int max_steps = 100;
};

constexpr int kDefaultMaxSteps = 100;

struct GeodesicResult {
    double distance = 0.0;                 // meters (cell_size * hops)
    int hops = 0;                          // BFS hop count
    std::optional<Heading> first_step;     // empty when from == to
};

// Applies one action. Blocked MoveForward is a silent no-op.
AgentPose step(const GridScene& scene, const AgentPose& pose, Action action);

// BFS over 4-connected walkable cells. The first step is taken from the
// lexicographically smallest shortest path with direction order N < E < S < W.
// Throws "disconnected" when no path exists.
GeodesicResult geodesic(const GridScene& scene, Cell from, Cell to);

// Shortest-path teacher: Stop at the goal, MoveForward when aligned with
// the geodesic first step, otherwise the single turn that most reduces the
// angular difference (TurnLeft on 180-degree ties).
Action oracle_action(const GridScene& scene, const AgentPose& pose, Cell goal);

// Uniform random start cell (!= source), heading, and sound class.
Episode sample_episode(const GridScene& scene, const std::vector<int64_t>& sound_classes,
                       Rng& rng, int max_steps = kDefaultMaxSteps);

// Seeded random rectangular room with random interior obstacles,
// rejection-sampled until the walkable set is connected.
GridScene generate_scene(const std::string& id, int width, int height, double cell_size,
                         double obstacle_fraction, double reverb_coeff, Rng& rng);

// Left-right flip (x -> width-1-x). Keeps the id; used for ear-symmetry checks.
GridScene mirror_scene(const GridScene& scene);
AgentPose mirror_pose(const AgentPose& pose, int width);

GridScene load_scene(const std::string& path);
void save_scene(const GridScene& scene, const std::string& path);

} // namespace echonav
