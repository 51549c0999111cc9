// Python binding: an in-process application tier. Requests and responses
// cross as JSON text; the Python package decodes them.

#include "campus/campus.hpp"
#include "campus/config.hpp"
#include "campus/dispatcher.hpp"
#include "campus/error.hpp"
#include "campus/persistence.hpp"
#include "campus/records.hpp"
#include "campus/reporting.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace campus;

namespace {

class Service {
  public:
    explicit Service(const std::map<std::string, std::string>& settings) {
        for (const auto& [k, v] : settings) config_.set(k, v);
        db_ = config_.data_dir == ":memory:" ? Database::open_in_memory() : Database::open(config_.data_dir);
        clock_ = make_clock(config_);
        campus_ = std::make_unique<Campus>(*db_, *clock_, service_config(config_));
        dispatcher_ = std::make_unique<Dispatcher>(*campus_);
    }

    std::string dispatch(const std::string& message) {
        py::gil_scoped_release release;
        return dispatcher_->dispatch_text(message);
    }

    std::map<std::string, int> load_fixture(const std::string& document) {
        auto fixture = Fixture::from_json(nlohmann::json::parse(document));
        py::gil_scoped_release release;
        auto tx = db_->begin();
        auto counts = campus::load_fixture(tx, fixture, *clock_);
        tx.commit();
        return counts;
    }

    std::pair<std::string, std::string> reset_password(const std::string& person) {
        py::gil_scoped_release release;
        auto issued = campus_->auth.reset_password(PersonId(person));
        return {issued.username, issued.password};
    }

    std::string report(const std::string& kind, const std::map<std::string, std::string>& filters) {
        py::gil_scoped_release release;
        return campus_->reporting.generate_unchecked(parse_report_kind(kind), filters);
    }

  private:
    Config config_;
    std::unique_ptr<Database> db_;
    std::unique_ptr<Clock> clock_;
    std::unique_ptr<Campus> campus_;
    std::unique_ptr<Dispatcher> dispatcher_;
};

}  // namespace

PYBIND11_MODULE(_campus, m) {
    m.doc() = "Campus information system application tier";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const CampusError& e) {
            auto cls = py::module_::import("campus_core._errors").attr("CampusError");
            auto err = cls(std::string(error_code_name(e.code())), e.what(), e.details().dump());
            PyErr_SetObject(cls.ptr(), err.ptr());
        } catch (const nlohmann::json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("migrate", [](const std::string& dir) { return campus::migrate(dir); }, py::arg("data_dir"),
          "Bring the store under data_dir to the latest schema; returns the version.");

    m.def("error_catalog", [] {
        std::vector<std::string> out;
        for (auto name : campus::error_catalog()) out.emplace_back(name);
        return out;
    });

    m.def(
        "parse_coursework_csv",
        [](const std::string& content) {
            std::vector<py::tuple> out;
            for (const auto& r : campus::parse_coursework_csv(content)) {
                out.push_back(py::make_tuple(r.line, r.student_id, r.assessment, r.score, r.max_score));
            }
            return out;
        },
        py::arg("content"));

    py::class_<Service>(m, "Service")
        .def(py::init<const std::map<std::string, std::string>&>(), py::arg("settings"))
        .def("dispatch", &Service::dispatch, py::arg("message"))
        .def("load_fixture", &Service::load_fixture, py::arg("document"))
        .def("reset_password", &Service::reset_password, py::arg("person_id"))
        .def("report", &Service::report, py::arg("kind"), py::arg("filters"));
}
