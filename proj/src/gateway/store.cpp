#include "flowclass/gateway/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flowclass::gateway {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void storage_error(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::storage_failure, what + " '" + path.string() + "': " + std::strerror(errno),
              {{"path", path.string()}});
}

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_error("write failed on", path);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_directory(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

Store::Store(Options options)
    : options_(std::move(options)),
      log_path_(options_.data_dir / "log.jsonl"),
      snapshot_path_(options_.data_dir / "snapshot.json") {
  std::error_code ec;
  fs::create_directories(options_.data_dir, ec);
  if (!fs::is_directory(options_.data_dir, ec)) {
    throw Error(ErrorCode::storage_failure,
                "data directory '" + options_.data_dir.string() + "' cannot be created",
                {{"path", options_.data_dir.string()}});
  }
  const fs::path probe = options_.data_dir / ".write-probe";
  const int probe_fd = ::open(probe.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (probe_fd < 0) storage_error("data directory is not writable", options_.data_dir);
  ::close(probe_fd);
  ::unlink(probe.c_str());

  log_fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (log_fd_ < 0) storage_error("cannot open log", log_path_);
}

Store::~Store() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

RestoreReport Store::restore(game::GameService& service, bool use_snapshot) {
  RestoreReport report;

  if (use_snapshot && fs::exists(snapshot_path_)) {
    std::ifstream in(snapshot_path_, std::ios::binary);
    const json doc = json::parse(in, nullptr, false);
    try {
      if (doc.is_discarded()) throw Error(ErrorCode::storage_failure, "snapshot is not JSON");
      service.load_snapshot(doc);
      report.snapshot_sequence = service.last_sequence();
    } catch (const std::exception&) {
      report.snapshot_rejected = true;
    }
  }

  std::ifstream in(log_path_, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string log = buffer.str();

  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::uint64_t expected = 1;
  while (pos < log.size()) {
    ++line_no;
    const std::size_t newline = log.find('\n', pos);
    auto stop = [&](std::string reason) {
      report.truncation = Truncation{line_no, pos, std::move(reason)};
    };
    if (newline == std::string::npos) {
      stop("incomplete record");
      break;
    }
    const json record = json::parse(log.begin() + static_cast<std::ptrdiff_t>(pos),
                                     log.begin() + static_cast<std::ptrdiff_t>(newline), nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("seq") ||
        !record["seq"].is_number_unsigned()) {
      stop("unparseable record");
      break;
    }
    const auto seq = record["seq"].get<std::uint64_t>();
    if (seq != expected) {
      stop("sequence gap: expected " + std::to_string(expected) + ", found " + std::to_string(seq));
      break;
    }
    if (seq > report.snapshot_sequence) {
      try {
        service.apply(record);
        ++report.replayed;
      } catch (const std::exception& e) {
        stop(std::string("record rejected: ") + e.what());
        break;
      }
    }
    ++expected;
    pos = newline + 1;
  }
  report.last_sequence = service.last_sequence();

  if (report.truncation) {
    std::lock_guard lock(log_mutex_);
    if (::ftruncate(log_fd_, static_cast<off_t>(report.truncation->byte_offset)) != 0) {
      storage_error("cannot truncate log", log_path_);
    }
    ::fsync(log_fd_);
  }
  return report;
}

void Store::append(const json& mutation) {
  const std::string line = mutation.dump() + '\n';
  std::lock_guard lock(log_mutex_);
  write_all(log_fd_, line, log_path_);
  if (::fdatasync(log_fd_) != 0) storage_error("fsync failed on", log_path_);
  ++appended_since_snapshot_;
}

void Store::maybe_snapshot(const game::GameService& service) {
  if (options_.snapshot_every == 0 || appended_since_snapshot_ < options_.snapshot_every) return;
  write_snapshot(service);
}

void Store::write_snapshot(const game::GameService& service) {
  std::lock_guard lock(snapshot_mutex_);
  appended_since_snapshot_ = 0;
  const std::string text = service.snapshot().dump() + '\n';
  const fs::path tmp = snapshot_path_.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) storage_error("cannot write snapshot", tmp);
  write_all(fd, text, tmp);
  ::fsync(fd);
  ::close(fd);
  if (::rename(tmp.c_str(), snapshot_path_.c_str()) != 0) storage_error("cannot install snapshot", snapshot_path_);
  sync_directory(options_.data_dir);
}

void Store::attach(game::GameService& service) {
  service.set_journal([this](const json& mutation) { append(mutation); });
}

}  // namespace flowclass::gateway
