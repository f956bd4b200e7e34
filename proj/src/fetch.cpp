#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "marscoloc/error.hpp"
#include "marscoloc/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

namespace marscoloc {

namespace fs = std::filesystem;

namespace {

struct Url {
    std::string origin; // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url)
{
    static const std::regex re(R"(^(https?://[^/?#]+)([^#]*)$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, re))
        throw Error(ErrorCode::Config, "unsupported URL: " + url);
    Url u{m[1].str(), m[2].str()};
    if (u.path.empty())
        u.path = "/";
    return u;
}

std::string file_name(const std::string& url)
{
    auto path = split_url(url).path;
    path = path.substr(0, path.find('?'));
    const auto slash = path.rfind('/');
    auto name = slash == std::string::npos ? path : path.substr(slash + 1);
    if (name.empty())
        throw Error(ErrorCode::Config, "URL has no file name: " + url);
    return name;
}

void replace_all(std::string& s, const std::string& from, const std::string& to)
{
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

bool non_empty_file(const fs::path& p)
{
    std::error_code ec;
    return fs::is_regular_file(p, ec) && fs::file_size(p, ec) > 0 && !ec;
}

void download(const std::string& url, const fs::path& dest)
{
    const auto u = split_url(url);
    httplib::Client client(u.origin);
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    const auto res = client.Get(u.path);
    if (!res)
        throw Error(ErrorCode::HttpFailure,
                    "request failed for " + url + ": " + httplib::to_string(res.error()));
    if (res->status == 404)
        throw Error(ErrorCode::ProductNotFound, "product not found: " + url);
    if (res->status < 200 || res->status >= 300)
        throw Error(ErrorCode::HttpFailure,
                    "HTTP " + std::to_string(res->status) + " for " + url);
    if (res->body.empty())
        throw Error(ErrorCode::HttpFailure, "empty response body for " + url);

    auto tmp = dest;
    tmp += ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::CacheWrite, "cannot write " + tmp.string());
        out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
        if (!out)
            throw Error(ErrorCode::CacheWrite, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, dest, ec);
    if (ec)
        throw Error(ErrorCode::CacheWrite, "cannot move " + tmp.string() + " into place: " +
                                               ec.message());
    if (!non_empty_file(dest))
        throw Error(ErrorCode::CacheWrite, "cached file is empty: " + dest.string());
}

} // namespace

std::string product_sol(const std::string& product_id, Mission mission)
{
    auto digits = [](std::string_view s) {
        std::size_t n = 0;
        while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n])))
            ++n;
        return std::string(s.substr(0, n));
    };
    if (mission == Mission::Curiosity)
        return digits(product_id);
    const auto us = product_id.find('_');
    if (us == std::string::npos)
        return {};
    return digits(std::string_view(product_id).substr(us + 1));
}

std::string expand_url(const std::string& url_template, const std::string& product_id,
                       Mission mission)
{
    auto sol = product_sol(product_id, mission);
    auto sol5 = sol;
    if (!sol5.empty()) {
        sol5.erase(0, std::min(sol5.find_first_not_of('0'), sol5.size() - 1));
        if (sol5.size() < 5)
            sol5.insert(0, 5 - sol5.size(), '0');
    }
    auto lower = product_id;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    auto url = url_template;
    replace_all(url, "{product_id_lower}", lower);
    replace_all(url, "{product_id}", product_id);
    replace_all(url, "{sol5}", sol5);
    replace_all(url, "{sol}", sol);
    return url;
}

FetchedProduct fetch_product(const std::string& product_id, Mission mission,
                             const fs::path& cache_dir, const ProductUrls& urls, bool force)
{
    if (product_id.empty() || product_id.find_first_of("/\\") != std::string::npos ||
        product_id == "." || product_id == "..")
        throw Error(ErrorCode::InvalidArgument, "invalid product id '" + product_id + "'");

    const auto label_url = expand_url(urls.label, product_id, mission);
    const auto image_url = expand_url(urls.image, product_id, mission);
    const auto dir = cache_dir / to_string(mission) / product_id;

    FetchedProduct out;
    out.label_path = dir / file_name(label_url);
    out.image_path = dir / file_name(image_url);

    if (!force && non_empty_file(out.label_path) && non_empty_file(out.image_path)) {
        out.from_cache = true;
        return out;
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::CacheWrite, "cannot create " + dir.string() + ": " + ec.message());
    download(label_url, out.label_path);
    download(image_url, out.image_path);
    return out;
}

} // namespace marscoloc
