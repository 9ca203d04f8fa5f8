#include "slt/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "slt/errors.hpp"

namespace slt {

namespace {

// ENVI data type codes used here.
constexpr int kTypeFloat32 = 4;
constexpr int kTypeUint16 = 12;

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct EnviHeader {
    int samples = 0;
    int lines = 0;
    int bands = 0;
    int data_type = 0;
    int byte_order = 0;
    int header_offset = 0;
    std::string interleave;
    std::vector<double> wavelengths;
};

// Key = value pairs; brace-delimited lists may span lines.
EnviHeader parse_envi_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ENVI header: " + path.string());

    std::string first;
    std::getline(in, first);
    if (trim(first) != "ENVI")
        throw ParseError("not an ENVI header (missing magic line): " + path.string());

    EnviHeader hdr;
    std::string line;
    while (std::getline(in, line)) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos) {
                std::string more;
                if (!std::getline(in, more))
                    throw ParseError("unterminated brace list in ENVI header: " + path.string());
                value += " " + trim(more);
            }
        }

        try {
            if (key == "samples") hdr.samples = std::stoi(value);
            else if (key == "lines") hdr.lines = std::stoi(value);
            else if (key == "bands") hdr.bands = std::stoi(value);
            else if (key == "data type") hdr.data_type = std::stoi(value);
            else if (key == "byte order") hdr.byte_order = std::stoi(value);
            else if (key == "header offset") hdr.header_offset = std::stoi(value);
            else if (key == "interleave") hdr.interleave = lower(value);
            else if (key == "wavelength") {
                std::string list = value;
                list.erase(std::remove(list.begin(), list.end(), '{'), list.end());
                list.erase(std::remove(list.begin(), list.end(), '}'), list.end());
                std::stringstream ss(list);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    tok = trim(tok);
                    if (!tok.empty()) hdr.wavelengths.push_back(std::stod(tok));
                }
            }
        } catch (const std::exception&) {
            throw ParseError("bad value for '" + key + "' in ENVI header: " + path.string());
        }
    }

    if (hdr.samples <= 0 || hdr.lines <= 0 || hdr.bands <= 0)
        throw ParseError("missing or invalid dimensions in ENVI header: " + path.string());
    if (hdr.byte_order != 0)
        throw ParseError("only byte order 0 (little endian) supported: " + path.string());
    if (!hdr.wavelengths.empty() && static_cast<int>(hdr.wavelengths.size()) != hdr.bands)
        throw ParseError("wavelength count does not match band count: " + path.string());
    return hdr;
}

std::filesystem::path raw_path_for(const std::filesystem::path& header_path) {
    std::filesystem::path p = header_path;
    p.replace_extension(".raw");
    return p;
}

void write_header(const std::filesystem::path& path, int samples, int lines, int bands,
                  int data_type, const std::string& interleave,
                  const std::vector<double>& wavelengths) {
    std::ostringstream out;
    out << "ENVI\n";
    out << "description = {multimodal sample raster}\n";
    out << "samples = " << samples << "\n";
    out << "lines = " << lines << "\n";
    out << "bands = " << bands << "\n";
    out << "header offset = 0\n";
    out << "file type = ENVI Standard\n";
    out << "data type = " << data_type << "\n";
    out << "interleave = " << interleave << "\n";
    out << "byte order = 0\n";
    if (!wavelengths.empty()) {
        out << "wavelength units = Nanometers\n";
        out << "wavelength = {";
        for (size_t i = 0; i < wavelengths.size(); ++i) {
            if (i) out << ", ";
            out << wavelengths[i];
        }
        out << "}\n";
    }
    write_text_file(path, out.str());
}

template <typename T>
std::vector<T> read_raw(const std::filesystem::path& path, size_t count, int offset) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ENVI raw file: " + path.string());
    in.seekg(offset);
    std::vector<T> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(T)));
    if (static_cast<size_t>(in.gcount()) != count * sizeof(T))
        throw ParseError("ENVI raw file truncated: " + path.string());
    return data;
}

template <typename T>
void write_raw(const std::filesystem::path& path, const T* data, size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open ENVI raw file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(T)));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_envi_cube(const std::filesystem::path& header_path, const HyperCube& cube) {
    write_header(header_path, cube.width(), cube.height(), cube.bands(), kTypeUint16,
                 "bsq", cube.wavelengths_nm);
    write_raw(raw_path_for(header_path), cube.data().data(), cube.data().size());
}

HyperCube read_envi_cube(const std::filesystem::path& header_path) {
    EnviHeader hdr = parse_envi_header(header_path);
    if (hdr.data_type != kTypeUint16)
        throw ParseError("expected 16-bit cube (data type 12): " + header_path.string());
    if (hdr.interleave != "bsq")
        throw ParseError("expected bsq interleave for cube: " + header_path.string());

    HyperCube cube(hdr.samples, hdr.lines, hdr.bands);
    cube.data() = read_raw<uint16_t>(raw_path_for(header_path), cube.data().size(),
                                     hdr.header_offset);
    cube.wavelengths_nm = hdr.wavelengths;
    for (size_t i = 1; i < cube.wavelengths_nm.size(); ++i)
        if (cube.wavelengths_nm[i] <= cube.wavelengths_nm[i - 1])
            throw ParseError("wavelengths not strictly increasing: " + header_path.string());
    return cube;
}

void write_envi_float(const std::filesystem::path& header_path, const RasterImage& img) {
    write_header(header_path, img.width(), img.height(), img.channels(), kTypeFloat32,
                 "bip", {});
    write_raw(raw_path_for(header_path), img.data().data(), img.data().size());
}

RasterImage read_envi_float(const std::filesystem::path& header_path) {
    EnviHeader hdr = parse_envi_header(header_path);
    if (hdr.data_type != kTypeFloat32)
        throw ParseError("expected float raster (data type 4): " + header_path.string());
    if (hdr.interleave != "bip")
        throw ParseError("expected bip interleave for float raster: " + header_path.string());

    RasterImage img(hdr.samples, hdr.lines, hdr.bands, ValueRange::unit_float);
    img.data() = read_raw<float>(raw_path_for(header_path), img.data().size(),
                                 hdr.header_offset);
    return img;
}

}  // namespace slt
