/*
 * Stub MPI library: PMPI definitions that journal their invocation, plus weak
 * MPI_ fallbacks so a link without a given wrapper still resolves (the real
 * library would provide the symbol the wrapper was excluded for).
 */

#include <stdio.h>
#include <string.h>

#include "mpi.h"

int stub_bottom_marker;
MPI_Status stub_status_ignore_marker;
MPI_Fint stub_f_status_ignore_marker;

/* Referenced by the generated legacy intercept layer. */
MPI_Fint wrapgen_mpi_bottom_f;

const void* stub_last_send_buf;

static char journal[STUB_JOURNAL_CAPACITY][STUB_JOURNAL_ENTRY_LENGTH];
static int journal_used;

void stub_journal_reset(void)
{
    journal_used = 0;
}

int stub_journal_count(void)
{
    return journal_used;
}

const char* stub_journal_entry(int index)
{
    return (index >= 0 && index < journal_used) ? journal[index] : "";
}

void stub_journal_append(const char* kind, const char* name)
{
    if (journal_used < STUB_JOURNAL_CAPACITY) {
        snprintf(journal[journal_used], STUB_JOURNAL_ENTRY_LENGTH, "%s %s", kind, name);
        ++journal_used;
    }
}

/* Tool surface: events on, every event text journaled verbatim
 * ("ENTER MPI_Send", "EXIT MPI_Send", ...). */
int event_gen_active(const char* procedure_name)
{
    (void) procedure_name;
    return 1;
}

void write_event(const char* event_text)
{
    if (journal_used < STUB_JOURNAL_CAPACITY) {
        snprintf(journal[journal_used], STUB_JOURNAL_ENTRY_LENGTH, "%s", event_text);
        ++journal_used;
    }
}

void record_metric(const char* metric_name, int metric_value)
{
    (void) metric_name;
    (void) metric_value;
}

/* Handle conversions. */
MPI_Comm MPI_Comm_f2c(MPI_Fint comm) { return (MPI_Comm) comm; }
MPI_Fint MPI_Comm_c2f(MPI_Comm comm) { return (MPI_Fint) comm; }
MPI_Datatype MPI_Type_f2c(MPI_Fint datatype) { return (MPI_Datatype) datatype; }
MPI_Fint MPI_Type_c2f(MPI_Datatype datatype) { return (MPI_Fint) datatype; }
MPI_Request MPI_Request_f2c(MPI_Fint request) { return (MPI_Request) request; }
MPI_Fint MPI_Request_c2f(MPI_Request request) { return (MPI_Fint) request; }
MPI_Info MPI_Info_f2c(MPI_Fint info) { return (MPI_Info) info; }
MPI_Fint MPI_Info_c2f(MPI_Info info) { return (MPI_Fint) info; }

int MPI_Status_f2c(const MPI_Fint* f_status, MPI_Status* c_status)
{
    c_status->MPI_SOURCE = (int) f_status[0];
    c_status->MPI_TAG = (int) f_status[1];
    c_status->MPI_ERROR = (int) f_status[2];
    return MPI_SUCCESS;
}

int MPI_Status_c2f(const MPI_Status* c_status, MPI_Fint* f_status)
{
    f_status[0] = (MPI_Fint) c_status->MPI_SOURCE;
    f_status[1] = (MPI_Fint) c_status->MPI_TAG;
    f_status[2] = (MPI_Fint) c_status->MPI_ERROR;
    return MPI_SUCCESS;
}

/* PMPI entries: journal and produce deterministic outputs. */
int PMPI_Init(void)
{
    stub_journal_append("PMPI", "MPI_Init");
    return MPI_SUCCESS;
}

int PMPI_Finalize(void)
{
    stub_journal_append("PMPI", "MPI_Finalize");
    return MPI_SUCCESS;
}

int PMPI_Send(const void* buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm)
{
    (void) count; (void) datatype; (void) dest; (void) tag; (void) comm;
    stub_last_send_buf = buf;
    stub_journal_append("PMPI", "MPI_Send");
    return MPI_SUCCESS;
}

int PMPI_Recv(void* buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Status* status)
{
    (void) buf; (void) count; (void) datatype; (void) tag; (void) comm;
    stub_journal_append("PMPI", "MPI_Recv");
    if (status != MPI_STATUS_IGNORE) {
        status->MPI_SOURCE = source;
        status->MPI_TAG = tag;
        status->MPI_ERROR = MPI_SUCCESS;
    }
    return MPI_SUCCESS;
}

int PMPI_Sendrecv(const void* sendbuf, int sendcount, MPI_Datatype sendtype, int dest, int sendtag, void* recvbuf, int recvcount, MPI_Datatype recvtype, int source, int recvtag, MPI_Comm comm, MPI_Status* status)
{
    (void) sendbuf; (void) sendcount; (void) sendtype; (void) dest; (void) sendtag;
    (void) recvbuf; (void) recvcount; (void) recvtype; (void) comm;
    stub_journal_append("PMPI", "MPI_Sendrecv");
    if (status != MPI_STATUS_IGNORE) {
        status->MPI_SOURCE = source;
        status->MPI_TAG = recvtag;
        status->MPI_ERROR = MPI_SUCCESS;
    }
    return MPI_SUCCESS;
}

int PMPI_Barrier(MPI_Comm comm)
{
    (void) comm;
    stub_journal_append("PMPI", "MPI_Barrier");
    return MPI_SUCCESS;
}

int PMPI_Comm_rank(MPI_Comm comm, int* rank)
{
    (void) comm;
    stub_journal_append("PMPI", "MPI_Comm_rank");
    *rank = 0;
    return MPI_SUCCESS;
}

int PMPI_Waitany(int count, MPI_Request* array_of_requests, int* index, MPI_Status* status)
{
    stub_journal_append("PMPI", "MPI_Waitany");
    for (int i = 0; i < count; ++i) {
        array_of_requests[i] = MPI_REQUEST_NULL;
    }
    *index = 0;
    if (status != MPI_STATUS_IGNORE) {
        status->MPI_SOURCE = 0;
        status->MPI_TAG = 0;
        status->MPI_ERROR = MPI_SUCCESS;
    }
    return MPI_SUCCESS;
}

int PMPI_Comm_create_keyval(MPI_Callback_function* comm_copy_attr_fn, MPI_Callback_function* comm_delete_attr_fn, int* comm_keyval, void* extra_state)
{
    (void) comm_copy_attr_fn; (void) comm_delete_attr_fn; (void) extra_state;
    stub_journal_append("PMPI", "MPI_Comm_create_keyval");
    *comm_keyval = 100;
    return MPI_SUCCESS;
}

int PMPI_Info_set(MPI_Info info, const char* key, const char* value)
{
    (void) info; (void) key; (void) value;
    stub_journal_append("PMPI", "MPI_Info_set");
    return MPI_SUCCESS;
}

/*
 * Weak MPI_ fallbacks, used only when the matching wrapper is excluded by an
 * undefined guard macro.  They journal a LIB entry so the driver can tell a
 * fallback call from an intercepted one.
 */
#define STUB_WEAK __attribute__((weak))

STUB_WEAK int MPI_Init(void)
{
    stub_journal_append("LIB", "MPI_Init");
    return PMPI_Init();
}

STUB_WEAK int MPI_Finalize(void)
{
    stub_journal_append("LIB", "MPI_Finalize");
    return PMPI_Finalize();
}

STUB_WEAK int MPI_Send(const void* buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm)
{
    stub_journal_append("LIB", "MPI_Send");
    return PMPI_Send(buf, count, datatype, dest, tag, comm);
}

STUB_WEAK int MPI_Recv(void* buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Status* status)
{
    stub_journal_append("LIB", "MPI_Recv");
    return PMPI_Recv(buf, count, datatype, source, tag, comm, status);
}

STUB_WEAK int MPI_Sendrecv(const void* sendbuf, int sendcount, MPI_Datatype sendtype, int dest, int sendtag, void* recvbuf, int recvcount, MPI_Datatype recvtype, int source, int recvtag, MPI_Comm comm, MPI_Status* status)
{
    stub_journal_append("LIB", "MPI_Sendrecv");
    return PMPI_Sendrecv(sendbuf, sendcount, sendtype, dest, sendtag,
                         recvbuf, recvcount, recvtype, source, recvtag, comm, status);
}

STUB_WEAK int MPI_Barrier(MPI_Comm comm)
{
    stub_journal_append("LIB", "MPI_Barrier");
    return PMPI_Barrier(comm);
}

STUB_WEAK int MPI_Comm_rank(MPI_Comm comm, int* rank)
{
    stub_journal_append("LIB", "MPI_Comm_rank");
    return PMPI_Comm_rank(comm, rank);
}

STUB_WEAK int MPI_Waitany(int count, MPI_Request* array_of_requests, int* index, MPI_Status* status)
{
    stub_journal_append("LIB", "MPI_Waitany");
    return PMPI_Waitany(count, array_of_requests, index, status);
}

STUB_WEAK int MPI_Comm_create_keyval(MPI_Callback_function* comm_copy_attr_fn, MPI_Callback_function* comm_delete_attr_fn, int* comm_keyval, void* extra_state)
{
    stub_journal_append("LIB", "MPI_Comm_create_keyval");
    return PMPI_Comm_create_keyval(comm_copy_attr_fn, comm_delete_attr_fn, comm_keyval, extra_state);
}

STUB_WEAK int MPI_Info_set(MPI_Info info, const char* key, const char* value)
{
    stub_journal_append("LIB", "MPI_Info_set");
    return PMPI_Info_set(info, key, value);
}
