#include "hoi/posekit/trajectory_io.hpp"

#include "hoi/common/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace hoi::posekit {

void write_trajectory(std::ostream& out, std::span<const HandPose> poses)
{
    out << kTrajectoryHeader << '\n';
    std::string line;
    for (const auto& pose : poses) {
        line = format_double(pose.timestamp);
        for (int j = 0; j < kJointCount; ++j)
            for (int c = 0; c < 3; ++c) {
                line += ',';
                line += format_double(pose.joints(j, c));
            }
        line += '\n';
        out << line;
    }
}

std::vector<HandPose> read_trajectory(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw TrajectoryFormatError("empty trajectory stream");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kTrajectoryHeader)
        throw TrajectoryFormatError("unsupported trajectory header: " + line);

    std::vector<HandPose> poses;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto fields = split(line, ',');
        if (fields.size() != 1 + kFeatureCount)
            throw TrajectoryFormatError("line " + std::to_string(line_no) + ": expected "
                                        + std::to_string(1 + kFeatureCount) + " fields, got "
                                        + std::to_string(fields.size()));
        HandPose pose;
        try {
            pose.timestamp = parse_double(fields[0]);
            for (int k = 0; k < kFeatureCount; ++k)
                pose.joints(k / 3, k % 3) = parse_double(fields[static_cast<std::size_t>(k) + 1]);
        } catch (const std::invalid_argument& e) {
            throw TrajectoryFormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
        poses.push_back(pose);
    }
    return poses;
}

void save_trajectory(const std::filesystem::path& path, std::span<const HandPose> poses)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    write_trajectory(out, poses);
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

std::vector<HandPose> load_trajectory(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path.string());
    return read_trajectory(in);
}

} // namespace hoi::posekit
