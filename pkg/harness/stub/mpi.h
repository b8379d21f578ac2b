/*
 * Minimal MPI surface for link-time smoke verification of generated wrappers.
 *
 * Every fixture procedure is declared in both its MPI_ and PMPI_ form.  The
 * PMPI_ definitions live in stub_mpi.c and log their invocation to an
 * in-memory journal; the MPI_ definitions there are weak, so a generated
 * wrapper overrides its procedure and an excluded wrapper falls back to the
 * stub without breaking the link.  Special constants get distinct sentinel
 * addresses so constant-mapping code paths are exercised for real.
 */

#ifndef STUB_MPI_H
#define STUB_MPI_H

#ifdef __cplusplus
extern "C" {
#endif

typedef int MPI_Fint;
typedef int MPI_Comm;
typedef int MPI_Datatype;
typedef int MPI_Group;
typedef int MPI_Win;
typedef int MPI_File;
typedef int MPI_Request;
typedef int MPI_Op;
typedef int MPI_Info;
typedef long long MPI_Count;

typedef struct MPI_Status {
    int MPI_SOURCE;
    int MPI_TAG;
    int MPI_ERROR;
} MPI_Status;

typedef int (MPI_Callback_function)(void);

#define MPI_SUCCESS 0
#define MPI_COMM_WORLD ((MPI_Comm) 91)
#define MPI_INT ((MPI_Datatype) 42)
#define MPI_INFO_NULL ((MPI_Info) 7)
#define MPI_REQUEST_NULL ((MPI_Request) 17)

/* Distinct sentinel addresses; deliberately not interchangeable. */
extern int stub_bottom_marker;
extern MPI_Status stub_status_ignore_marker;
extern MPI_Fint stub_f_status_ignore_marker;
#define MPI_BOTTOM ((void*) &stub_bottom_marker)
#define MPI_STATUS_IGNORE (&stub_status_ignore_marker)
#define MPI_F_STATUS_IGNORE (&stub_f_status_ignore_marker)

/* Handle conversions: integer handles, value-preserving. */
MPI_Comm MPI_Comm_f2c(MPI_Fint comm);
MPI_Fint MPI_Comm_c2f(MPI_Comm comm);
MPI_Datatype MPI_Type_f2c(MPI_Fint datatype);
MPI_Fint MPI_Type_c2f(MPI_Datatype datatype);
MPI_Request MPI_Request_f2c(MPI_Fint request);
MPI_Fint MPI_Request_c2f(MPI_Request request);
MPI_Info MPI_Info_f2c(MPI_Fint info);
MPI_Fint MPI_Info_c2f(MPI_Info info);
int MPI_Status_f2c(const MPI_Fint* f_status, MPI_Status* c_status);
int MPI_Status_c2f(const MPI_Status* c_status, MPI_Fint* f_status);

/* Fixture procedures: interposable entry points and their PMPI twins. */
int MPI_Init(void);
int PMPI_Init(void);
int MPI_Finalize(void);
int PMPI_Finalize(void);
int MPI_Send(const void* buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm);
int PMPI_Send(const void* buf, int count, MPI_Datatype datatype, int dest, int tag, MPI_Comm comm);
int MPI_Recv(void* buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Status* status);
int PMPI_Recv(void* buf, int count, MPI_Datatype datatype, int source, int tag, MPI_Comm comm, MPI_Status* status);
int MPI_Sendrecv(const void* sendbuf, int sendcount, MPI_Datatype sendtype, int dest, int sendtag, void* recvbuf, int recvcount, MPI_Datatype recvtype, int source, int recvtag, MPI_Comm comm, MPI_Status* status);
int PMPI_Sendrecv(const void* sendbuf, int sendcount, MPI_Datatype sendtype, int dest, int sendtag, void* recvbuf, int recvcount, MPI_Datatype recvtype, int source, int recvtag, MPI_Comm comm, MPI_Status* status);
int MPI_Barrier(MPI_Comm comm);
int PMPI_Barrier(MPI_Comm comm);
int MPI_Comm_rank(MPI_Comm comm, int* rank);
int PMPI_Comm_rank(MPI_Comm comm, int* rank);
int MPI_Waitany(int count, MPI_Request* array_of_requests, int* index, MPI_Status* status);
int PMPI_Waitany(int count, MPI_Request* array_of_requests, int* index, MPI_Status* status);
int MPI_Comm_create_keyval(MPI_Callback_function* comm_copy_attr_fn, MPI_Callback_function* comm_delete_attr_fn, int* comm_keyval, void* extra_state);
int PMPI_Comm_create_keyval(MPI_Callback_function* comm_copy_attr_fn, MPI_Callback_function* comm_delete_attr_fn, int* comm_keyval, void* extra_state);
int MPI_Info_set(MPI_Info info, const char* key, const char* value);
int PMPI_Info_set(MPI_Info info, const char* key, const char* value);

/* Tool surface expected by the generated wrappers. */
int event_gen_active(const char* procedure_name);
void write_event(const char* event_text);
void record_metric(const char* metric_name, int metric_value);

/* Invocation journal. */
#define STUB_JOURNAL_CAPACITY 256
#define STUB_JOURNAL_ENTRY_LENGTH 64
void stub_journal_reset(void);
int stub_journal_count(void);
const char* stub_journal_entry(int index);
void stub_journal_append(const char* kind, const char* name);

/* Last buffer PMPI_Send saw; lets the driver verify MPI_BOTTOM mapping. */
extern const void* stub_last_send_buf;

#ifdef __cplusplus
}
#endif

#endif /* STUB_MPI_H */
